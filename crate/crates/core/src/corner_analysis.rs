//! Singular exponents and singular functions at corners, resonance and
//! compatibility checks, and Fredholm index prediction.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{ccw_angle, BcKind, DomainSpec, Point};
use crate::jet::Jet2;
use crate::smooth::ramp_down;
use crate::{Error, Result};

const INTEGER_TOL: f64 = 1e-9;

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= INTEGER_TOL
}

/// One singular function `r^{-λ} cos(λθ + φ_out)` (or its logarithmic
/// variant for integer `λ`) attached to a corner.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTerm {
    pub corner_id: usize,
    pub m: i64,
    pub lambda: f64,
    pub phi_out: f64,
    pub is_log: bool,
    /// Support radius of the cutoff `η`; `f64::INFINITY` means `η ≡ 1`.
    pub cutoff_radius: f64,
    pub omega: f64,
    pub origin: Point,
    /// Direction of the outgoing edge, which is the local `θ = 0` ray.
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerSpectrum {
    pub corner_id: usize,
    pub window: (f64, f64),
    /// Sorted by `λ` descending.
    pub terms: Vec<SingularTerm>,
    /// Resonance flag for `σ = −a − 2` when the window is `(−(2+σ), 0)` with
    /// `σ ∈ (0, 1)`; false otherwise.
    pub resonance_hit: bool,
}

impl CornerSpectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }
}

/// All `λ = (φ_in − φ_out + mπ)/ω` in the open window.
pub fn singular_exponents(domain: &DomainSpec, corner_id: usize, window: (f64, f64)) -> Result<CornerSpectrum> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidArgument(format!("window ({a}, {b}) must be bounded and nonempty")));
    }
    let c = domain.corner(corner_id)?;
    let out_edge = domain.edge(c.outgoing_edge)?;
    let t_out = out_edge.curve.eval(0.0).d1;
    let theta0 = t_out[1].atan2(t_out[0]);
    let delta = c.phi_in - c.phi_out;
    let m_lo = ((a * c.angle - delta) / PI).floor() as i64 - 1;
    let m_hi = ((b * c.angle - delta) / PI).ceil() as i64 + 1;
    let cutoff_radius = 0.5 * domain.corner_separation(corner_id)?;
    let mut terms = Vec::new();
    for m in m_lo..=m_hi {
        let lambda = (delta + m as f64 * PI) / c.angle;
        if lambda > a && lambda < b {
            terms.push(SingularTerm {
                corner_id,
                m,
                lambda,
                phi_out: c.phi_out,
                is_log: near_integer(lambda),
                cutoff_radius,
                omega: c.angle,
                origin: c.position,
                theta0,
            });
        }
    }
    terms.sort_by(|x, y| y.lambda.partial_cmp(&x.lambda).unwrap());
    let sigma = -a - 2.0;
    let resonance_hit = b == 0.0 && sigma > 0.0 && sigma < 1.0 && near_integer((delta + (2.0 + sigma) * c.angle) / PI);
    Ok(CornerSpectrum { corner_id, window, terms, resonance_hit })
}

/// Polar partial derivatives `[F, F_r, F_θ, F_rr, F_rθ, F_θθ]` without cutoff.
fn polar_parts(term: &SingularTerm, r: f64, theta: f64) -> [f64; 6] {
    let lam = term.lambda;
    let mu = -lam;
    let arg = lam * theta + term.phi_out;
    let (s, c) = arg.sin_cos();
    let rm = r.powf(mu);
    let rm1 = r.powf(mu - 1.0);
    let rm2 = r.powf(mu - 2.0);
    if term.is_log {
        let l = r.ln();
        let w = l * c + theta * s;
        let wt = -lam * l * s + s + theta * lam * c;
        [
            rm * w,
            mu * rm1 * w + rm1 * c,
            rm * wt,
            rm2 * (mu * (mu - 1.0) * w + (2.0 * mu - 1.0) * c),
            mu * rm1 * wt - rm1 * lam * s,
            rm * (-lam * lam * w + 2.0 * lam * c),
        ]
    } else {
        [rm * c, mu * rm1 * c, -lam * rm * s, mu * (mu - 1.0) * rm2 * c, -lam * mu * rm1 * s, -lam * lam * rm * c]
    }
}

fn cutoff(term: &SingularTerm, r: f64) -> [f64; 3] {
    if term.cutoff_radius.is_infinite() {
        [1.0, 0.0, 0.0]
    } else {
        ramp_down(r, 0.5 * term.cutoff_radius, term.cutoff_radius)
    }
}

fn check_origin(term: &SingularTerm) -> Result<()> {
    if term.lambda >= 0.0 {
        Err(Error::InvalidArgument(format!("singular evaluation at the vertex with λ = {}", term.lambda)))
    } else {
        Ok(())
    }
}

/// `η(r)·S(r, θ)` in corner-local polar coordinates.
pub fn eval_singular(term: &SingularTerm, r: f64, theta: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidArgument("negative radius".into()));
    }
    if r == 0.0 {
        check_origin(term)?;
        return Ok(0.0);
    }
    Ok(cutoff(term, r)[0] * polar_parts(term, r, theta)[0])
}

/// Local polar coordinates of a Cartesian point; `θ ∈ [0, 2π)` from the outgoing edge.
pub fn local_polar(term: &SingularTerm, p: Point) -> (f64, f64) {
    let d = [p[0] - term.origin[0], p[1] - term.origin[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let th = ccw_angle([term.theta0.cos(), term.theta0.sin()], d);
    // ccw_angle lands in (0, 2π]; a point on the θ = 0 ray maps to 2π
    let th = if th > term.omega + 0.5 * (2.0 * PI - term.omega) { th - 2.0 * PI } else { th };
    (r, th)
}

/// Cartesian jet of `η·S` at `p`.
pub fn eval_singular_jet(term: &SingularTerm, p: Point) -> Result<Jet2> {
    let (r, th) = local_polar(term, p);
    if r == 0.0 {
        check_origin(term)?;
        if term.lambda > -2.0 {
            return Err(Error::InvalidArgument("second derivatives unbounded at the vertex".into()));
        }
        return Ok(Jet2::ZERO);
    }
    let f = polar_parts(term, r, th);
    let e = cutoff(term, r);
    let u = [
        e[0] * f[0],
        e[1] * f[0] + e[0] * f[1],
        e[0] * f[2],
        e[2] * f[0] + 2.0 * e[1] * f[1] + e[0] * f[3],
        e[1] * f[2] + e[0] * f[4],
        e[0] * f[5],
    ];
    let [_, ur, ut, urr, urt, utt] = u;
    let phi = th + term.theta0;
    let (s, c) = phi.sin_cos();
    let (r2, cs, c2, s2) = (r * r, c * s, c * c, s * s);
    Ok(Jet2 {
        v: u[0],
        g: [c * ur - s / r * ut, s * ur + c / r * ut],
        h: [
            c2 * urr - 2.0 * cs / r * urt + s2 / r2 * utt + s2 / r * ur + 2.0 * cs / r2 * ut,
            cs * urr + (c2 - s2) / r * urt - cs / r2 * utt - cs / r * ur - (c2 - s2) / r2 * ut,
            s2 * urr + 2.0 * cs / r * urt + c2 / r2 * utt + c2 / r * ur - 2.0 * cs / r2 * ut,
        ],
    })
}

/// Per corner: is `(φ_in − φ_out + (2+σ)ω)/π` within `1e-9` of an integer.
pub fn check_resonance(domain: &DomainSpec, sigma: f64) -> Result<Vec<(usize, bool)>> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("σ = {sigma} outside (0, 1)")));
    }
    Ok(domain
        .corners
        .iter()
        .map(|c| (c.id, near_integer((c.phi_in - c.phi_out + (2.0 + sigma) * c.angle) / PI)))
        .collect())
}

/// Compatibility residual at a right-angle Dirichlet/Robin corner.
///
/// `g_d(t)` returns the Dirichlet datum and its `t`-derivative on the
/// Dirichlet edge; `g_n(t)` the Robin datum on the Robin edge. The residual
/// is `|g_N − ∂_ν g_D − d·g_D|` at the corner, where `ν` is the outward
/// normal of the Robin edge, which is tangent to the Dirichlet edge there.
pub fn check_compatibility(
    domain: &DomainSpec,
    corner_id: usize,
    g_d: &dyn Fn(f64) -> [f64; 2],
    g_n: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    let c = domain.corner(corner_id)?;
    if (c.angle - FRAC_PI_2).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("corner {corner_id} is not a right angle")));
    }
    let ein = domain.edge(c.incoming_edge)?;
    let eout = domain.edge(c.outgoing_edge)?;
    let ((de, td), (re, tr)) = match (ein.bc, eout.bc) {
        (BcKind::Dirichlet, BcKind::Robin) => ((ein, 1.0), (eout, 0.0)),
        (BcKind::Robin, BcKind::Dirichlet) => ((eout, 0.0), (ein, 1.0)),
        _ => return Err(Error::InvalidArgument(format!("corner {corner_id} is not mixed Dirichlet/Robin"))),
    };
    if re.beta.value(tr).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("β ≠ 0 at corner {corner_id}")));
    }
    let dd = de.curve.eval(td).d1;
    let speed = dd[0].hypot(dd[1]);
    let tau_d = [dd[0] / speed, dd[1] / speed];
    let nu_r = domain.edge_frame(re.id, tr)?.normal;
    let sign = tau_d[0] * nu_r[0] + tau_d[1] * nu_r[1];
    let [gv, gt] = g_d(td);
    let dnu = sign * gt / speed;
    Ok((g_n(tr) - dnu - re.dcoef.value(tr) * gv).abs())
}

/// Which operator the index prediction refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSetting {
    /// Full Hölder spaces for all edge data.
    Full,
    /// Half-disk operator on functions vanishing on the Dirichlet arc, with
    /// Robin data vanishing at the corners.
    Pinned,
}

fn is_right_angle_mixed(domain: &DomainSpec, id: usize) -> Result<bool> {
    let c = domain.corner(id)?;
    let ein = domain.edge(c.incoming_edge)?;
    let eout = domain.edge(c.outgoing_edge)?;
    let beta_zero = |e: &crate::domain::EdgeSpec, t: f64| e.bc == BcKind::Dirichlet || e.beta.value(t).abs() <= 1e-12;
    Ok((c.angle - FRAC_PI_2).abs() <= 1e-10
        && ein.bc != eout.bc
        && beta_zero(ein, 1.0)
        && beta_zero(eout, 0.0))
}

/// Predicted Fredholm index, or `NotPredicted` for uncovered configurations.
///
/// Covered: every corner right-angle mixed with `β = 0` there (index `−I₀`,
/// or `0` in the pinned setting), or every corner with an empty exponent
/// window `(−(2+σ), 0)` (index `0`).
pub fn predict_index(domain: &DomainSpec, sigma: f64, setting: IndexSetting) -> Result<i64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("σ = {sigma} outside (0, 1)")));
    }
    let mut mixed = 0;
    for c in &domain.corners {
        if is_right_angle_mixed(domain, c.id)? {
            mixed += 1;
        }
    }
    if mixed == domain.corners.len() {
        return Ok(match setting {
            IndexSetting::Full => -(mixed as i64),
            IndexSetting::Pinned => 0,
        });
    }
    if setting == IndexSetting::Pinned {
        return Err(Error::NotPredicted("pinned setting needs right-angle mixed corners".into()));
    }
    let mut all_regular = true;
    for c in &domain.corners {
        let spec = singular_exponents(domain, c.id, (-(2.0 + sigma), 0.0))?;
        all_regular &= spec.terms.is_empty();
    }
    if all_regular {
        Ok(0)
    } else {
        Err(Error::NotPredicted("corner configuration not covered".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_half_disk, make_sector, BcKind::*};

    fn lambdas(d: &DomainSpec, id: usize, w: (f64, f64)) -> Vec<f64> {
        singular_exponents(d, id, w).unwrap().lambdas()
    }

    #[test]
    fn exponent_tables() {
        let s = make_sector(FRAC_PI_2, Dirichlet, Dirichlet).unwrap();
        assert_eq!(lambdas(&s, 0, (-2.5, 0.0)), [-2.0]);
        let s = make_sector(FRAC_PI_2, Dirichlet, Robin).unwrap();
        assert_eq!(lambdas(&s, 0, (-2.5, 0.0)), [-1.0]);
        let s = make_sector(1.5 * PI, Dirichlet, Dirichlet).unwrap();
        let l = lambdas(&s, 0, (-2.5, 0.0));
        let want = [-2.0 / 3.0, -4.0 / 3.0, -2.0];
        assert_eq!(l.len(), 3);
        for (a, b) in l.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let hd = make_half_disk();
        for id in [1, 2] {
            let sp = singular_exponents(&hd, id, (-2.5, 0.0)).unwrap();
            assert_eq!(sp.terms.len(), 1);
            assert!((sp.terms[0].lambda + 1.0).abs() < 1e-12);
            assert!(sp.terms[0].is_log);
        }
        assert!(singular_exponents(&hd, 1, (f64::NEG_INFINITY, 0.0)).is_err());
    }

    #[test]
    fn exponents_satisfy_formula() {
        for (w, l, r) in [(0.3, Dirichlet, Robin), (2.0, Robin, Robin), (5.5, Dirichlet, Dirichlet)] {
            let s = make_sector(w, l, r).unwrap();
            let c = s.corner(0).unwrap();
            let sp = singular_exponents(&s, 0, (-7.0, 3.0)).unwrap();
            for t in &sp.terms {
                let want = (c.phi_in - c.phi_out + t.m as f64 * PI) / c.angle;
                assert!((t.lambda - want).abs() < 1e-12);
            }
            let count = (-100..100)
                .map(|m| (c.phi_in - c.phi_out + m as f64 * PI) / c.angle)
                .filter(|l| *l > -7.0 && *l < 3.0)
                .count();
            assert_eq!(count, sp.terms.len());
        }
    }

    #[test]
    fn singular_function_vanishes_on_dirichlet_ray() {
        let s = make_sector(1.5 * PI, Dirichlet, Dirichlet).unwrap();
        let t = &singular_exponents(&s, 0, (-1.0, 0.0)).unwrap().terms[0];
        for r in [0.01, 0.1, 0.3] {
            assert!(eval_singular(t, r, 0.0).unwrap().abs() < 1e-16);
        }
        assert_eq!(eval_singular(t, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(eval_singular(t, 0.9, 1.0).unwrap(), 0.0);
        let mut pos = t.clone();
        pos.lambda = 0.5;
        assert!(eval_singular(&pos, 0.0, 0.0).is_err());
    }

    #[test]
    fn singular_function_is_discretely_harmonic() {
        let s = make_sector(1.5 * PI, Dirichlet, Dirichlet).unwrap();
        let mut t = singular_exponents(&s, 0, (-1.0, 0.0)).unwrap().terms[0].clone();
        t.cutoff_radius = f64::INFINITY;
        let mut prev = 0.0;
        for n in [64usize, 128] {
            let h = 1.0 / n as f64;
            let (dr, dt) = (h, h);
            let mut worst: f64 = 0.0;
            for i in n / 4..n {
                let r = i as f64 * dr;
                let mut j = 1;
                while (j as f64 + 1.0) * dt < t.omega {
                    let th = j as f64 * dt;
                    let u = |r: f64, th: f64| eval_singular(&t, r, th).unwrap();
                    let lap = (u(r + dr, th) - 2.0 * u(r, th) + u(r - dr, th)) / (dr * dr)
                        + (u(r + dr, th) - u(r - dr, th)) / (2.0 * dr * r)
                        + (u(r, th + dt) - 2.0 * u(r, th) + u(r, th - dt)) / (dt * dt * r * r);
                    worst = worst.max(lap.abs());
                    j += 1;
                }
            }
            assert!(worst <= 10.0 * h * h, "n={n} residual {worst}");
            if prev > 0.0 {
                assert!(prev / worst > 3.0);
            }
            prev = worst;
        }
    }

    #[test]
    fn cartesian_jet_matches_differences() {
        let s = make_sector(1.5 * PI, Dirichlet, Robin).unwrap();
        let hd = make_half_disk();
        let mut terms: Vec<SingularTerm> = singular_exponents(&s, 0, (-2.5, 0.0)).unwrap().terms;
        terms.extend(singular_exponents(&hd, 1, (-2.5, 0.0)).unwrap().terms);
        terms.extend(singular_exponents(&hd, 2, (-2.5, 0.0)).unwrap().terms);
        let pts = [[-0.3, 0.4], [0.2, 0.25], [-0.6, 0.2], [0.5, 0.1]];
        let h = 1e-5;
        for t in &terms {
            for p0 in pts {
                let p = [p0[0] + t.origin[0] * 0.7, p0[1] + t.origin[1] * 0.7];
                let (r, th) = local_polar(t, p);
                if r < 0.05 || th > t.omega {
                    continue;
                }
                let j = eval_singular_jet(t, p).unwrap();
                let f = |x: f64, y: f64| eval_singular_jet(t, [x, y]).unwrap();
                let gx = (f(p[0] + h, p[1]).v - f(p[0] - h, p[1]).v) / (2.0 * h);
                let gy = (f(p[0], p[1] + h).v - f(p[0], p[1] - h).v) / (2.0 * h);
                let hxy = (f(p[0], p[1] + h).g[0] - f(p[0], p[1] - h).g[0]) / (2.0 * h);
                let hyy = (f(p[0], p[1] + h).g[1] - f(p[0], p[1] - h).g[1]) / (2.0 * h);
                let hxx = (f(p[0] + h, p[1]).g[0] - f(p[0] - h, p[1]).g[0]) / (2.0 * h);
                let sc = 1.0 + j.max_abs();
                for (a, b) in [(gx, j.g[0]), (gy, j.g[1]), (hxx, j.h[0]), (hxy, j.h[1]), (hyy, j.h[2])] {
                    assert!((a - b).abs() < 1e-6 * sc, "λ={} p={p:?}: {a} vs {b}", t.lambda);
                }
                if t.cutoff_radius.is_infinite() || r < 0.5 * t.cutoff_radius {
                    assert!(j.laplacian().abs() < 1e-8 * sc);
                }
            }
        }
    }

    #[test]
    fn resonance_examples() {
        let s = make_sector(FRAC_PI_2, Dirichlet, Robin).unwrap();
        let c = s.corner(0).unwrap();
        assert!((c.phi_in - c.phi_out - FRAC_PI_2).abs() < 1e-15);
        let q = (c.phi_in - c.phi_out + 2.5 * c.angle) / PI;
        assert!((q - 1.75).abs() < 1e-12);
        assert!(!check_resonance(&s, 0.5).unwrap()[0].1);
        let s = make_sector(FRAC_PI_2, Dirichlet, Dirichlet).unwrap();
        assert!(!check_resonance(&s, 0.5).unwrap()[0].1);
        let s = make_sector(PI, Dirichlet, Dirichlet).unwrap();
        for k in 1..20 {
            assert!(!check_resonance(&s, k as f64 / 20.0).unwrap()[0].1);
        }
        // (0 + (2 + σ)·2π/3)/π = 2 at σ = 1 − ... pick ω with a hit
        let s = make_sector(2.0 * PI / 2.5, Dirichlet, Dirichlet).unwrap();
        assert!(check_resonance(&s, 0.5).unwrap()[0].1);
    }

    #[test]
    fn compatibility_examples() {
        let hd = make_half_disk();
        // Γ₁ parameter t ∈ [0,1] maps to angle πt; at S₁ (t = 1) the outward
        // normal of Γ₂ is (0, −1), the arc tangent is (0, −1) as well.
        let zero = |_t: f64| [0.0, 0.0];
        assert_eq!(check_compatibility(&hd, 1, &zero, &|_| 0.0).unwrap(), 0.0);
        // g_D = arc length increasing along ν₂ near S₁: s = π t
        let s = |_t: f64| [0.0, PI];
        assert!(check_compatibility(&hd, 1, &s, &|_| 1.0).unwrap() < 1e-14);
        assert!(check_compatibility(&hd, 1, &s, &|_| 0.0).unwrap() > 0.5);
        // at S₂ the arc leaves along (0, 1) = −ν₂
        let s2 = |_t: f64| [0.0, -PI];
        assert!(check_compatibility(&hd, 2, &s2, &|_| 1.0).unwrap() < 1e-14);
        let hd2 = crate::domain::make_half_disk_with(crate::domain::EdgeField::zero(), crate::domain::EdgeField::Const(2.0));
        let one = |_t: f64| [1.0, 0.0];
        assert!(check_compatibility(&hd2, 1, &one, &|_| 2.0).unwrap() < 1e-15);
        assert!(check_compatibility(&hd2, 1, &one, &|_| 1.0).unwrap() > 0.5);
        let sq = make_sector(FRAC_PI_2, Dirichlet, Dirichlet).unwrap();
        assert!(check_compatibility(&sq, 0, &one, &|_| 1.0).is_err());
    }

    #[test]
    fn index_prediction() {
        let hd = make_half_disk();
        assert_eq!(predict_index(&hd, 0.5, IndexSetting::Full).unwrap(), -2);
        assert_eq!(predict_index(&hd, 0.5, IndexSetting::Pinned).unwrap(), 0);
        let thin = make_sector(0.3, Dirichlet, Dirichlet).unwrap();
        // artificial right-angle D/D corners at the arc have λ = −2 in the window
        assert!(matches!(predict_index(&thin, 0.5, IndexSetting::Full), Err(Error::NotPredicted(_))));
        let l = make_sector(1.5 * PI, Dirichlet, Dirichlet).unwrap();
        assert!(matches!(predict_index(&l, 0.5, IndexSetting::Full), Err(Error::NotPredicted(_))));
        let lens = lens_domain(0.5);
        for c in &lens.corners {
            assert!((c.angle - 0.5).abs() < 1e-12);
        }
        assert_eq!(predict_index(&lens, 0.5, IndexSetting::Full).unwrap(), 0);
        assert!(predict_index(&lens, 0.5, IndexSetting::Pinned).is_err());
    }

    /// Two circular arcs through (±1, 0) meeting at angle `omega`.
    fn lens_domain(omega: f64) -> DomainSpec {
        use crate::domain::{Curve, EdgeSpec};
        let k = 1.0 / (0.5 * omega).tan();
        let r = (1.0 + k * k).sqrt();
        let a = k.atan();
        let upper = Curve::Arc { center: [0.0, -k], radius: r, theta0: a, theta1: PI - a };
        let lower = Curve::Arc { center: [0.0, k], radius: r, theta0: -PI + a, theta1: -a };
        DomainSpec::from_edges(
            "lens",
            alloc::vec![EdgeSpec::new(0, upper, Dirichlet), EdgeSpec::new(1, lower, Dirichlet)],
        )
        .unwrap()
    }
}
