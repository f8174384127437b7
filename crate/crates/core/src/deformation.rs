//! Corner-freezing coordinates.
//!
//! [`freeze_matrix`] turns a constant-coefficient principal part `A` into a
//! matrix `B` with `B·A·B = c·I`, and [`corner_deformation`] builds a global
//! diffeomorphism that is `x ↦ S_j + B_j(x − S_j)` near each corner and the
//! identity away from the corners.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{ccw_angle, edge_phase, Curve, CurvePoint, DomainSpec, Point};
use crate::smooth::radial;
use crate::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

/// `B` with `B·A·B = c·I` and eigenvalues of `B` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezeMatrix {
    pub b: Mat2,
    pub cscale: f64,
    /// Ascending.
    pub eigenvalues: [f64; 2],
}

/// Eigenvalues (ascending) and unit eigenvectors of a symmetric 2×2 matrix.
pub fn sym_eigen(a: Mat2) -> ([f64; 2], [Point; 2]) {
    let (p, q, r) = (a[0][0], a[0][1], a[1][1]);
    let m = 0.5 * (p + r);
    let d = (0.5 * (p - r)).hypot(q);
    let l = [m - d, m + d];
    if q == 0.0 {
        return if p <= r { (l, [[1.0, 0.0], [0.0, 1.0]]) } else { (l, [[0.0, 1.0], [1.0, 0.0]]) };
    }
    let (u, w) = ([q, l[1] - p], [l[1] - r, q]);
    let v1 = if u[0].hypot(u[1]) >= w[0].hypot(w[1]) { u } else { w };
    let v1 = {
        let n = v1[0].hypot(v1[1]);
        [v1[0] / n, v1[1] / n]
    };
    let v0 = [-v1[1], v1[0]];
    (l, [v0, v1])
}

fn from_spectrum(l: [f64; 2], v: [Point; 2]) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += l[k] * v[k][i] * v[k][j];
            }
        }
    }
    let off = 0.5 * (m[0][1] + m[1][0]);
    m[0][1] = off;
    m[1][0] = off;
    m
}

pub fn mat_mul(a: Mat2, b: Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_vec(a: Mat2, v: Point) -> Point {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn det(a: Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `B = s·A^{−1/2}` with `s = min(1, 1/λ_max(A^{−1/2}))` and `c = s²`.
pub fn freeze_matrix(a: Mat2) -> Result<FreezeMatrix> {
    if (a[0][1] - a[1][0]).abs() > 1e-14 * (1.0 + a[0][1].abs()) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let (l, v) = sym_eigen(a);
    if !(l[0] > 0.0) {
        return Err(Error::InvalidArgument(format!("matrix is not positive definite (eigenvalue {})", l[0])));
    }
    let inv = [1.0 / l[0].sqrt(), 1.0 / l[1].sqrt()];
    let s = (1.0 / inv[0]).min(1.0);
    let ev = [s * inv[1], s * inv[0]];
    let b = from_spectrum([s * inv[0], s * inv[1]], v);
    Ok(FreezeMatrix { b, cscale: s * s, eigenvalues: ev })
}

/// `Φ(x) = x + Σ_j η(|x − S_j|)(B_j − I)(x − S_j)` with `η = 1` on `[0, ε]`
/// and `η = 0` on `[2ε, ∞)`.
#[derive(Debug, Clone)]
pub struct CornerDiffeo {
    pub centers: Vec<Point>,
    pub matrices: Vec<Mat2>,
    pub epsilon: f64,
}

impl CornerDiffeo {
    /// Value, Jacobian and the Hessians of both components.
    pub fn jet(&self, p: Point) -> (Point, Mat2, [[f64; 3]; 2]) {
        let mut v = p;
        let mut jm = [[1.0, 0.0], [0.0, 1.0]];
        let mut hs = [[0.0; 3]; 2];
        let e = self.epsilon;
        for (s, b) in self.centers.iter().zip(&self.matrices) {
            let d = [p[0] - s[0], p[1] - s[1]];
            if d[0] * d[0] + d[1] * d[1] >= 4.0 * e * e {
                continue;
            }
            let (eta, g, h) = radial(p, *s, e, 2.0 * e);
            let m = [[b[0][0] - 1.0, b[0][1]], [b[1][0], b[1][1] - 1.0]];
            let w = mat_vec(m, d);
            for k in 0..2 {
                v[k] += eta * w[k];
                for i in 0..2 {
                    jm[k][i] += g[i] * w[k] + eta * m[k][i];
                }
                hs[k][0] += h[0] * w[k] + 2.0 * g[0] * m[k][0];
                hs[k][1] += h[1] * w[k] + g[0] * m[k][1] + g[1] * m[k][0];
                hs[k][2] += h[2] * w[k] + 2.0 * g[1] * m[k][1];
            }
        }
        (v, jm, hs)
    }

    pub fn apply(&self, p: Point) -> Point {
        self.jet(p).0
    }

    pub fn jacobian(&self, p: Point) -> Mat2 {
        self.jet(p).1
    }

    pub fn jacobian_det(&self, p: Point) -> f64 {
        det(self.jacobian(p))
    }

    /// Newton solve of `Φ(x) = q`, started from `q`.
    pub fn inverse(&self, q: Point) -> Result<Point> {
        let mut x = q;
        for _ in 0..100 {
            let (v, jm, _) = self.jet(x);
            let r = [v[0] - q[0], v[1] - q[1]];
            if r[0].abs().max(r[1].abs()) <= 1e-14 * (1.0 + q[0].abs().max(q[1].abs())) {
                return Ok(x);
            }
            let dj = det(jm);
            let dx = [(jm[1][1] * r[0] - jm[0][1] * r[1]) / dj, (jm[0][0] * r[1] - jm[1][0] * r[0]) / dj];
            let r0 = r[0].hypot(r[1]);
            let mut step = 1.0;
            loop {
                let y = [x[0] - step * dx[0], x[1] - step * dx[1]];
                let v = self.apply(y);
                if (v[0] - q[0]).hypot(v[1] - q[1]) < r0 || step < 1e-6 {
                    x = y;
                    break;
                }
                step *= 0.5;
            }
        }
        let (v, _, _) = self.jet(x);
        let res = (v[0] - q[0]).hypot(v[1] - q[1]);
        if res <= 1e-12 {
            Ok(x)
        } else {
            Err(Error::Divergence { iterations: 100, residual: res })
        }
    }

    /// Smallest `λ₁λ₂` over the corner matrices.
    pub fn det_bound(&self) -> f64 {
        self.matrices.iter().map(|b| det(*b)).fold(1.0, f64::min)
    }
}

/// Diffeomorphism equal to `S_j + B_j(x − S_j)` on `B_ε(S_j)` and the identity
/// outside `∪ B_{2ε}(S_j)`. `matrices` is aligned with `domain.corners`.
pub fn corner_deformation(domain: &DomainSpec, matrices: &[Mat2], epsilon: f64) -> Result<CornerDiffeo> {
    if matrices.len() != domain.corners.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} matrices, got {}",
            domain.corners.len(),
            matrices.len()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    for c in &domain.corners {
        let sep = domain.corner_separation(c.id)?;
        if epsilon >= 0.25 * sep {
            return Err(Error::InvalidArgument(format!(
                "ε = {epsilon} is not below a quarter of the corner separation {sep}"
            )));
        }
    }
    for b in matrices {
        if b[0][1] != b[1][0] {
            return Err(Error::InvalidArgument("deformation matrix is not symmetric".into()));
        }
        let (l, _) = sym_eigen(*b);
        if !(l[0] > 0.0 && l[1] <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("eigenvalues {l:?} are not in (0, 1]")));
        }
    }
    Ok(CornerDiffeo {
        centers: domain.corners.iter().map(|c| c.position).collect(),
        matrices: matrices.to_vec(),
        epsilon,
    })
}

/// Image of `domain` under `phi`: edges become `Φ ∘ c` and corner angles and
/// phases are recomputed.
pub fn pushforward_domain(domain: &DomainSpec, phi: &CornerDiffeo) -> DomainSpec {
    let mut out = domain.clone();
    for e in &mut out.edges {
        let c = e.curve.clone();
        let f = phi.clone();
        e.curve = Curve::Custom(Arc::new(move |t| {
            let cp = c.eval(t);
            let (v, jm, hs) = f.jet(cp.p);
            let d1 = mat_vec(jm, cp.d1);
            let jd2 = mat_vec(jm, cp.d2);
            let (a, b) = (cp.d1[0], cp.d1[1]);
            let q = |h: [f64; 3]| h[0] * a * a + 2.0 * h[1] * a * b + h[2] * b * b;
            CurvePoint { p: v, d1, d2: [jd2[0] + q(hs[0]), jd2[1] + q(hs[1])] }
        }));
    }
    for k in 0..out.corners.len() {
        let (ein, eout) = (out.corners[k].incoming_edge, out.corners[k].outgoing_edge);
        let ein = out.edges.iter().find(|e| e.id == ein).cloned();
        let eout = out.edges.iter().find(|e| e.id == eout).cloned();
        if let (Some(ein), Some(eout)) = (ein, eout) {
            let a = ein.curve.eval(1.0);
            let b = eout.curve.eval(0.0);
            let c = &mut out.corners[k];
            c.position = b.p;
            c.angle = ccw_angle(b.d1, [-a.d1[0], -a.d1[1]]);
            c.phi_in = edge_phase(&ein, 1.0);
            c.phi_out = edge_phase(&eout, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_half_disk, make_sector, BcKind};
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bab(f: &FreezeMatrix, a: Mat2) -> Mat2 {
        mat_mul(mat_mul(f.b, a), f.b)
    }

    fn close(a: Mat2, b: Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn freeze_examples() {
        let f = freeze_matrix([[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(close(f.b, [[1.0, 0.0], [0.0, 1.0]], 0.0) && f.cscale == 1.0);
        let f = freeze_matrix([[4.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(close(f.b, [[0.5, 0.0], [0.0, 1.0]], 1e-15) && f.cscale == 1.0);
        let f = freeze_matrix([[0.25, 0.0], [0.0, 1.0]]).unwrap();
        assert!(close(f.b, [[1.0, 0.0], [0.0, 0.5]], 1e-15));
        assert!((f.cscale - 0.25).abs() < 1e-15);
        assert!(freeze_matrix([[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(freeze_matrix([[1.0, 0.5], [0.0, 1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn freeze_identity(l0 in 0.05f64..20.0, l1 in 0.05f64..20.0, th in 0.0f64..PI) {
            let v = [[th.cos(), th.sin()], [-th.sin(), th.cos()]];
            let a = from_spectrum([l0, l1], v);
            let f = freeze_matrix(a).unwrap();
            prop_assert_eq!(f.b[0][1], f.b[1][0]);
            let c = f.cscale;
            prop_assert!(close(bab(&f, a), [[c, 0.0], [0.0, c]], 1e-12 * (1.0 + l0.max(l1))));
            prop_assert!(f.eigenvalues[0] > 0.0 && f.eigenvalues[1] <= 1.0 + 1e-15);
            prop_assert!((f.eigenvalues[1] - 1.0).abs() < 1e-12 || c == 1.0);
        }
    }

    #[test]
    fn identity_matrices_give_identity() {
        let d = make_half_disk();
        let phi = corner_deformation(&d, &[[[1.0, 0.0], [0.0, 1.0]]; 2], 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = [rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..1.5)];
            assert_eq!(phi.apply(p), p);
        }
    }

    #[test]
    fn jacobian_bound_and_locality() {
        let d = make_half_disk();
        let eps = 0.2;
        let b = [[0.5, 0.0], [0.0, 1.0]];
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let phi = corner_deformation(&d, &[b, id], eps).unwrap();
        let s = d.corners[0].position;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut min_det = f64::INFINITY;
        for _ in 0..10_000 {
            let r = 2.5 * eps * rng.gen::<f64>().sqrt();
            let th = rng.gen_range(0.0..2.0 * PI);
            let p = [s[0] + r * th.cos(), s[1] + r * th.sin()];
            min_det = min_det.min(phi.jacobian_det(p));
            let q = phi.apply(p);
            if r <= eps {
                let e = [s[0] + 0.5 * (p[0] - s[0]), p[1]];
                assert!((q[0] - e[0]).abs() <= 1e-15 && (q[1] - e[1]).abs() <= 1e-15);
            }
            if r >= 2.0 * eps {
                assert_eq!(q, p);
            }
            let back = phi.inverse(q).unwrap();
            assert!((back[0] - p[0]).abs() < 1e-10 && (back[1] - p[1]).abs() < 1e-10);
        }
        assert!(min_det >= 0.5 - 1e-9, "{min_det}");
    }

    #[test]
    fn jet_matches_differences() {
        let d = make_half_disk();
        let b = [[0.6, 0.1], [0.1, 0.8]];
        let phi = corner_deformation(&d, &[b, b], 0.2).unwrap();
        let p = [-0.75, 0.13];
        let (_, jm, hs) = phi.jet(p);
        let h = 1e-5;
        for i in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let (vp, jp, _) = phi.jet(pp);
            let (vm, jmn, _) = phi.jet(pm);
            for k in 0..2 {
                assert!(((vp[k] - vm[k]) / (2.0 * h) - jm[k][i]).abs() < 1e-8);
                let dx = (jp[k][0] - jmn[k][0]) / (2.0 * h);
                let dy = (jp[k][1] - jmn[k][1]) / (2.0 * h);
                let (exx, exy) = if i == 0 { (hs[k][0], hs[k][1]) } else { (hs[k][1], hs[k][2]) };
                assert!((dx - exx).abs() < 1e-6 && (dy - exy).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn epsilon_too_large() {
        let d = make_half_disk();
        assert!(corner_deformation(&d, &[[[1.0, 0.0], [0.0, 1.0]]; 2], 0.6).is_err());
        assert!(corner_deformation(&d, &[[[1.5, 0.0], [0.0, 1.0]]; 2], 0.1).is_err());
    }

    #[test]
    fn pushforward_angles() {
        let d = make_half_disk();
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let phi = corner_deformation(&d, &[id, id], 0.2).unwrap();
        let same = pushforward_domain(&d, &phi);
        for (a, b) in d.corners.iter().zip(&same.corners) {
            assert_eq!(a.angle, b.angle);
            assert_eq!(a.position, b.position);
        }
        let b = [[0.5, 0.0], [0.0, 1.0]];
        let phi = corner_deformation(&d, &[b, id], 0.2).unwrap();
        let moved = pushforward_domain(&d, &phi);
        // At S₁ the diameter leaves along +x and the arc arrives along −y.
        let expect = ccw_angle(mat_vec(b, [1.0, 0.0]), mat_vec(b, [0.0, 1.0]));
        assert!((moved.corners[0].angle - expect).abs() < 1e-12);
        assert!((expect - (1.0f64).atan2(0.0)).abs() < 1e-15);
        let sq = make_sector(PI / 2.0, BcKind::Dirichlet, BcKind::Dirichlet).unwrap();
        let phi = corner_deformation(&sq, &[id; 3], 0.1).unwrap();
        let out = pushforward_domain(&sq, &phi);
        assert!((out.corners[0].angle - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn skewed_matrix_changes_angle() {
        let sq = make_sector(PI / 2.0, BcKind::Dirichlet, BcKind::Dirichlet).unwrap();
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let b = [[0.7, 0.2], [0.2, 0.5]];
        let mut ms = [id; 3];
        let k = sq.corners.iter().position(|c| !c.artificial).unwrap();
        ms[k] = b;
        let phi = corner_deformation(&sq, &ms, 0.1).unwrap();
        let out = pushforward_domain(&sq, &phi);
        let expect = ccw_angle(mat_vec(b, [1.0, 0.0]), mat_vec(b, [0.0, 1.0]));
        assert!((out.corners[k].angle - expect).abs() < 1e-12);
        assert!((expect - (0.5f64.atan2(0.2) - 0.2f64.atan2(0.7))).abs() < 1e-12);
    }
}
