use num_rational::Ratio;

use crate::quadrature::integrate_pieces;
use crate::smooth::step;

/// Even cutoff with `φ = 1` on `[−1/4, 1/4]`, `φ = 0` outside `(−3/4, 3/4)`
/// and unit mass.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlateauCutoff;

pub const PLATEAU: f64 = 0.25;
pub const SUPPORT: f64 = 0.75;

impl PlateauCutoff {
    /// `[φ, φ', φ'']` at `t`.
    #[inline]
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let a = t.abs();
        if a >= SUPPORT {
            return [0.0; 3];
        }
        if a <= PLATEAU {
            return [1.0, 0.0, 0.0];
        }
        let w = SUPPORT - PLATEAU;
        let s = step((SUPPORT - a) / w);
        let sg = if t < 0.0 { -1.0 } else { 1.0 };
        [s[0], -sg * s[1] / w, s[2] / (w * w)]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    pub fn plateau(&self) -> f64 {
        PLATEAU
    }

    pub fn support(&self) -> f64 {
        SUPPORT
    }

    /// Numerical `∫φ`.
    pub fn integral(&self) -> f64 {
        integrate_pieces(|t| [self.value(t)], &[-SUPPORT, -PLATEAU, PLATEAU, SUPPORT], 1e-14)[0]
    }
}

pub fn build_cutoff() -> PlateauCutoff {
    PlateauCutoff
}

/// `c` with `Σ_j (−j)^l c_j = 1` for `l = 0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReflectionCoeffs {
    pub c: [Ratio<i64>; 3],
}

impl ReflectionCoeffs {
    pub fn as_f64(&self) -> [f64; 3] {
        self.c.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

/// Floating values of the reflection coefficients.
pub const REFLECTION: [f64; 3] = [6.0, -8.0, 3.0];

/// Solves the Vandermonde system exactly by fraction-valued elimination.
pub fn reflection_coeffs() -> ReflectionCoeffs {
    let r = |n: i64| Ratio::from_integer(n);
    let mut a = [[r(0); 4]; 3];
    for l in 0..3 {
        for j in 0..3 {
            a[l][j] = r((-(j as i64 + 1)).pow(l as u32));
        }
        a[l][3] = r(1);
    }
    for col in 0..3 {
        let piv = (col..3).find(|&i| a[i][col] != r(0)).expect("Vandermonde nodes are distinct");
        a.swap(col, piv);
        for i in 0..3 {
            if i != col {
                let f = a[i][col] / a[col][col];
                for k in col..4 {
                    let v = a[col][k];
                    a[i][k] -= f * v;
                }
            }
        }
    }
    ReflectionCoeffs { c: [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Vector3};

    #[test]
    fn cutoff_shape() {
        let p = build_cutoff();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.25), 1.0);
        assert_eq!(p.value(-0.25), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.value(-1.0), 0.0);
        assert!((p.integral() - 1.0).abs() < 1e-10);
        for k in 0..100 {
            let t = -1.0 + 0.02 * k as f64;
            assert_eq!(p.value(t), p.value(-t));
            let v = p.value(t);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn cutoff_derivatives() {
        let p = build_cutoff();
        let h = 1e-6;
        for k in 1..60 {
            let t = -0.8 + k as f64 * 0.027;
            let d1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let d2 = (p.eval(t + h)[1] - p.eval(t - h)[1]) / (2.0 * h);
            assert!((d1 - p.eval(t)[1]).abs() < 1e-7);
            assert!((d2 - p.eval(t)[2]).abs() < 1e-5);
        }
    }

    #[test]
    fn coefficients_exact_and_match_float_solve() {
        let rc = reflection_coeffs();
        assert_eq!(rc.c, [Ratio::from_integer(6), Ratio::from_integer(-8), Ratio::from_integer(3)]);
        for l in 0..3u32 {
            let s: Ratio<i64> = (0..3).map(|j| Ratio::from_integer((-(j as i64 + 1)).pow(l)) * rc.c[j]).sum();
            assert_eq!(s, Ratio::from_integer(1));
        }
        let m = Matrix3::from_fn(|l, j| (-(j as f64 + 1.0)).powi(l as i32));
        let x = m.lu().solve(&Vector3::new(1.0, 1.0, 1.0)).unwrap();
        for j in 0..3 {
            assert!((x[j] - rc.as_f64()[j]).abs() < 1e-12);
            assert_eq!(rc.as_f64()[j], REFLECTION[j]);
        }
    }
}
