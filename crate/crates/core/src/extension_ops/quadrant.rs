use alloc::format;

use super::cutoff::{PlateauCutoff, REFLECTION, SUPPORT};
use super::data::Data1d;
use super::field::ExtensionField;
use super::kernel::{t_x_extend, t_y_extend};
use super::COMPAT_TOL;
use crate::jet::Jet2;
use crate::{Error, Result};

/// Boundary condition on one chart edge together with its data.
///
/// Bottom edge (`y = 0`, data in `x`): oblique means `−∂_y w + β∂_x w = g`.
/// Left edge (`x = 0`, data in `y`): oblique means `−∂_x w + α∂_y w = h`.
#[derive(Debug, Clone)]
pub enum EdgeCondition {
    Dirichlet(Data1d),
    Oblique { coef: f64, data: Data1d },
}

impl EdgeCondition {
    pub fn data(&self) -> &Data1d {
        match self {
            EdgeCondition::Dirichlet(d) => d,
            EdgeCondition::Oblique { data, .. } => data,
        }
    }
}

fn phi() -> impl Fn(f64) -> [f64; 3] + Send + Sync + Copy {
    |t| PlateauCutoff.eval(t)
}

/// `t^k/k!·φ(t)` for `k = 1, 2`.
fn moment(k: u32) -> impl Fn(f64) -> [f64; 3] + Send + Sync + Copy {
    move |t| {
        let p = PlateauCutoff.eval(t);
        let (m, d1, d2) = match k {
            1 => (t, 1.0, 0.0),
            _ => (0.5 * t * t, t, 1.0),
        };
        [m * p[0], d1 * p[0] + m * p[1], d2 * p[0] + 2.0 * d1 * p[1] + m * p[2]]
    }
}

/// Node spacing for tabulated residual data.
pub(crate) const TABLE_STEP: f64 = 2e-3;

const S: (f64, f64) = (-SUPPORT, SUPPORT);

/// `αX₁(x)Z'(y) + φ(x)Z(y)` for `Z = Y_k`; satisfies `−∂_x F + α∂_y F = 0` on `x = 0`.
fn left_oblique_profile(alpha: f64, k: u32) -> ExtensionField {
    let z = moment(k);
    let x1 = moment(1);
    ExtensionField::from_fn([S.0, S.1, S.0, S.1], move |p| {
        let zy = z(p[1]);
        let zp = [zy[1], zy[2], f64::NAN];
        let a = Jet2::of_x(x1(p[0])).mul(Jet2 { v: zp[0], g: [0.0, zp[1]], h: [0.0, 0.0, z3(k, p[1])] }) * alpha;
        a + Jet2::of_x(PlateauCutoff.eval(p[0])).mul(Jet2::of_y(zy))
    })
}

/// Third derivative of `Y_k = t^k/k!·φ(t)`.
fn z3(k: u32, t: f64) -> f64 {
    let p = PlateauCutoff.eval(t);
    let p3 = cutoff_third(t);
    match k {
        1 => 3.0 * p[2] + t * p3,
        _ => 3.0 * p[1] + 3.0 * t * p[2] + 0.5 * t * t * p3,
    }
}

fn cutoff_third(t: f64) -> f64 {
    let h = 1e-4;
    let a = PlateauCutoff.eval(t + h)[2];
    let b = PlateauCutoff.eval(t - h)[2];
    let c = PlateauCutoff.eval(t + 2.0 * h)[2];
    let d = PlateauCutoff.eval(t - 2.0 * h)[2];
    (8.0 * (a - b) - (c - d)) / (12.0 * h)
}

/// Field with zero value and gradient on `x = 0`, zero trace on `y = 0`,
/// and `−∂_y A(x, 0) = g̃(x)` for `x > 0`; `g̃` must vanish on `x < 0`.
fn reflected_kernel(gt: &Data1d) -> ExtensionField {
    let t = t_x_extend(gt);
    let mut parts = alloc::vec![t.clone()];
    for (j, c) in REFLECTION.iter().enumerate() {
        let k = (j + 1) as f64;
        parts.push(t.pullback_affine([[-k, 0.0], [0.0, 1.0]], [0.0, 0.0]).scale(-c));
    }
    ExtensionField::sum(&parts)
}

fn bottom_operator(beta: f64) -> [f64; 2] {
    [beta, -1.0]
}

/// Both edges Dirichlet: `w = h(y)φ(x) + g(x)φ(y) − g(0)φ(x)φ(y)` with
/// reflected extensions to negative arguments.
pub fn quadrant_dirichlet_dirichlet(g: &Data1d, h: &Data1d) -> Result<ExtensionField> {
    let (g0, h0) = (g.value(0.0), h.value(0.0));
    if (g0 - h0).abs() > COMPAT_TOL {
        return Err(Error::Incompatible(format!("Dirichlet traces disagree at the corner: {g0} vs {h0}")));
    }
    let gt = g.reflect_left();
    let ht = h.reflect_left();
    let (gs, hs) = (gt.support, ht.support);
    let a = ExtensionField::separable(S, hs, phi(), move |y| ht.eval(y));
    let b = ExtensionField::separable(gs, S, move |x| gt.eval(x), phi());
    let c = ExtensionField::separable(S, S, phi(), phi()).scale(-g0);
    Ok(ExtensionField::sum(&[a, b, c]))
}

/// Bottom oblique `−∂_y + β∂_x` with data `g`, left Dirichlet with data `h`.
pub fn quadrant_oblique_dirichlet(g: &Data1d, h: &Data1d, beta: f64) -> Result<ExtensionField> {
    let ht = h.reflect_left();
    let hs = ht.support;
    let v = ExtensionField::separable(S, hs, phi(), move |y| ht.eval(y));
    let g1 = g.sub(&Data1d::bottom_trace(&v, bottom_operator(beta)));
    let [a, b, _] = g1.eval(0.0);
    let c = if beta != 0.0 {
        ExtensionField::separable(S, S, move |x| {
            let p = PlateauCutoff.eval(x);
            let q = [a * x + 0.5 * b * x * x, a + b * x, b];
            [(q[0] * p[0]) / beta, (q[1] * p[0] + q[0] * p[1]) / beta, (q[2] * p[0] + 2.0 * q[1] * p[1] + q[0] * p[2]) / beta]
        }, phi())
    } else {
        if a.abs() > COMPAT_TOL {
            return Err(Error::Incompatible(format!("β = 0 requires g(0) = ∂_y h(0), defect {a}")));
        }
        ExtensionField::separable(S, S, moment(1), moment(1)).scale(-b)
    };
    finish(g1, v, c, beta)
}

fn finish(g1: Data1d, v: ExtensionField, c: ExtensionField, beta: f64) -> Result<ExtensionField> {
    let gt = g1.sub(&Data1d::bottom_trace(&c, bottom_operator(beta))).tabulate(TABLE_STEP).positive_part();
    let a = reflected_kernel(&gt);
    Ok(ExtensionField::sum(&[v, c, a]))
}

/// Bottom oblique `−∂_y + β∂_x` with data `g`, left oblique `−∂_x + α∂_y` with data `h`.
pub fn quadrant_oblique_oblique(g: &Data1d, h: &Data1d, alpha: f64, beta: f64) -> Result<ExtensionField> {
    let v = t_y_extend(&h.reflect_left());
    let g1 = g.sub(&Data1d::bottom_trace(&v, bottom_operator(beta)));
    let [a, b, _] = g1.eval(0.0);
    let x2y0 = || ExtensionField::separable(S, S, moment(2), phi());
    let c = if beta != 0.0 && (alpha * beta - 1.0).abs() <= 1e-14 {
        if a.abs() > COMPAT_TOL {
            return Err(Error::Incompatible(format!("αβ = 1 requires g(0) = 0 after reduction, defect {a}")));
        }
        x2y0().scale(b / beta)
    } else if beta != 0.0 {
        let c3 = -a / (1.0 - alpha * beta);
        x2y0().scale(b / beta).add(&left_oblique_profile(alpha, 1).scale(c3))
    } else if alpha != 0.0 {
        left_oblique_profile(alpha, 1).scale(-a).add(&left_oblique_profile(alpha, 2).scale(-b / alpha))
    } else {
        if b.abs() > COMPAT_TOL {
            return Err(Error::Incompatible(format!("α = β = 0 requires g′(0) = 0 after reduction, defect {b}")));
        }
        ExtensionField::separable(S, S, phi(), moment(1)).scale(-a)
    };
    finish(g1, v, c, beta)
}

/// Dispatches on the edge types; a Dirichlet bottom with oblique left edge
/// is handled by exchanging the axes.
pub fn quadrant_extension(bottom: &EdgeCondition, left: &EdgeCondition) -> Result<ExtensionField> {
    use EdgeCondition::*;
    match (bottom, left) {
        (Dirichlet(g), Dirichlet(h)) => quadrant_dirichlet_dirichlet(g, h),
        (Oblique { coef, data }, Dirichlet(h)) => quadrant_oblique_dirichlet(data, h, *coef),
        (Dirichlet(g), Oblique { coef, data }) => Ok(quadrant_oblique_dirichlet(data, g, *coef)?.swap_xy()),
        (Oblique { coef: b, data: g }, Oblique { coef: a, data: h }) => quadrant_oblique_oblique(g, h, *a, *b),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random `u = Σ a_kl x^k y^l · φ(x/2)φ(y/2)`-style smooth field.
    pub(crate) fn random_u(rng: &mut ChaCha8Rng) -> ExtensionField {
        let c: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = |t: f64| crate::smooth::ramp_down(t.abs(), 0.5, 1.5);
        ExtensionField::from_fn([-1.5, 1.5, -1.5, 1.5], move |p| {
            let (x, y) = (p[0], p[1]);
            let mut poly = Jet2::ZERO;
            for k in 0..3 {
                for l in 0..3 {
                    let xk = [x.powi(k), k as f64 * x.powi((k - 1).max(0)), (k * (k - 1)) as f64 * x.powi((k - 2).max(0))];
                    let yl = [y.powi(l), l as f64 * y.powi((l - 1).max(0)), (l * (l - 1)) as f64 * y.powi((l - 2).max(0))];
                    poly += Jet2::of_x(xk).mul(Jet2::of_y(yl)) * c[(3 * k + l) as usize];
                }
            }
            let ex = e(x);
            let ey = e(y);
            let sx = if x < 0.0 { -1.0 } else { 1.0 };
            let sy = if y < 0.0 { -1.0 } else { 1.0 };
            poly.mul(Jet2::of_x([ex[0], sx * ex[1], ex[2]])).mul(Jet2::of_y([ey[0], sy * ey[1], ey[2]]))
        })
    }

    pub(crate) fn bottom_value(u: &ExtensionField) -> Data1d {
        Data1d::bottom_value(u)
    }

    pub(crate) fn left_value(u: &ExtensionField) -> Data1d {
        Data1d::bottom_value(&u.swap_xy())
    }

    pub(crate) fn bottom_oblique(u: &ExtensionField, beta: f64) -> Data1d {
        Data1d::bottom_trace(u, [beta, -1.0])
    }

    pub(crate) fn left_oblique(u: &ExtensionField, alpha: f64) -> Data1d {
        Data1d::bottom_trace(&u.swap_xy(), [alpha, -1.0])
    }

    pub(crate) fn check_bottom(w: &ExtensionField, bc: &EdgeCondition, xs: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in xs {
            let j = w.jet([x, 0.0]);
            let (got, want) = match bc {
                EdgeCondition::Dirichlet(g) => (j.v, g.value(x)),
                EdgeCondition::Oblique { coef, data } => (-j.g[1] + coef * j.g[0], data.value(x)),
            };
            worst = worst.max((got - want).abs());
        }
        worst
    }

    pub(crate) fn check_left(w: &ExtensionField, bc: &EdgeCondition, ys: &[f64]) -> f64 {
        check_bottom(&w.swap_xy(), bc, ys)
    }

    fn samples() -> Vec<f64> {
        (0..25).map(|k| 0.01 + 0.06 * k as f64).collect()
    }

    #[test]
    fn all_case_splits_reproduce_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases: [(Option<f64>, Option<f64>); 9] = [
            (None, None),
            (Some(0.0), None),
            (Some(1.0), None),
            (None, Some(0.7)),
            (Some(2.0), Some(3.0)),
            (Some(2.0), Some(0.5)),
            (Some(0.0), Some(1.5)),
            (Some(0.0), Some(0.0)),
            (Some(-1.3), Some(0.0)),
        ];
        for (beta, alpha) in cases {
            let u = random_u(&mut rng);
            let bottom = match beta {
                None => EdgeCondition::Dirichlet(bottom_value(&u)),
                Some(b) => EdgeCondition::Oblique { coef: b, data: bottom_oblique(&u, b) },
            };
            let left = match alpha {
                None => EdgeCondition::Dirichlet(left_value(&u)),
                Some(a) => EdgeCondition::Oblique { coef: a, data: left_oblique(&u, a) },
            };
            let w = quadrant_extension(&bottom, &left).unwrap();
            let eb = check_bottom(&w, &bottom, &samples());
            let el = check_left(&w, &left, &samples());
            assert!(eb < 1e-6 && el < 1e-6, "β={beta:?} α={alpha:?}: {eb:e} {el:e}");
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let z = Data1d::zero();
        for w in [
            quadrant_dirichlet_dirichlet(&z, &z).unwrap(),
            quadrant_oblique_dirichlet(&z, &z, 0.0).unwrap(),
            quadrant_oblique_oblique(&z, &z, 0.0, 0.0).unwrap(),
            quadrant_oblique_oblique(&z, &z, 2.0, 0.5).unwrap(),
        ] {
            for p in [[0.1, 0.2], [0.5, 0.05], [-0.3, 0.4]] {
                assert_eq!(w.jet(p).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn incompatible_data_is_rejected() {
        let one = Data1d::plateau_poly(&[1.0], 0.3, 1.0);
        let z = Data1d::zero();
        assert!(quadrant_oblique_oblique(&one, &z, 0.5, 2.0).is_err());
        assert!(quadrant_oblique_dirichlet(&one, &z, 0.0).is_err());
        assert!(quadrant_dirichlet_dirichlet(&one, &z).is_err());
        let slope = Data1d::plateau_poly(&[0.0, 1.0], 0.3, 1.0);
        assert!(quadrant_oblique_oblique(&slope, &z, 0.0, 0.0).is_err());
    }

    #[test]
    fn dirichlet_pair_examples() {
        let sq = |c: f64| Data1d::new((-2.0, 2.0), move |t| [c * t * t, 2.0 * c * t, 2.0 * c]);
        let w = quadrant_dirichlet_dirichlet(&sq(1.0), &sq(1.0)).unwrap();
        for t in [0.05, 0.1, 0.2, 0.24] {
            assert!((w.value([t, 0.0]) - t * t).abs() < 1e-15);
            assert!((w.value([0.0, t]) - t * t).abs() < 1e-15);
        }
        let one = Data1d::plateau_poly(&[1.0], 0.5, 1.0);
        assert_eq!(quadrant_dirichlet_dirichlet(&one, &one).unwrap().value([0.0, 0.0]), 1.0);
    }

    #[test]
    fn extension_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (u1, u2) = (random_u(&mut rng), random_u(&mut rng));
        let s = 0.37;
        let u3 = u1.scale(s).add(&u2);
        let mk = |u: &ExtensionField| {
            quadrant_oblique_oblique(&bottom_oblique(u, 2.0), &left_oblique(u, 3.0), 3.0, 2.0).unwrap()
        };
        let (w1, w2, w3) = (mk(&u1), mk(&u2), mk(&u3));
        for _ in 0..100 {
            let p = [rng.gen_range(-1.0..1.5), rng.gen_range(-1.0..1.5)];
            assert!((w3.value(p) - s * w1.value(p) - w2.value(p)).abs() < 1e-10);
        }
    }
}
