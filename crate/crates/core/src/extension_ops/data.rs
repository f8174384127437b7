use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::cutoff::REFLECTION;
use super::field::ExtensionField;
use crate::smooth::ramp_down;

type Eval1d = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Compactly supported data on a line with `[f, f', f'']` access.
///
/// Oblique data only needs `f` and `f'`; when the second derivative is not
/// available it is reported as NaN.
#[derive(Clone)]
pub struct Data1d {
    f: Eval1d,
    /// Closed interval outside which the data vanishes.
    pub support: (f64, f64),
    /// Points where `f''` may jump; used as quadrature breakpoints.
    pub kinks: Vec<f64>,
}

impl core::fmt::Debug for Data1d {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Data1d(support {:?})", self.support)
    }
}

impl Data1d {
    pub fn new(support: (f64, f64), f: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), support, kinks: Vec::new() }
    }

    pub fn zero() -> Self {
        Self::new((0.0, 0.0), |_| [0.0; 3])
    }

    #[inline]
    pub fn eval(&self, x: f64) -> [f64; 3] {
        if x < self.support.0 || x > self.support.1 {
            return [0.0; 3];
        }
        (self.f)(x)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    /// `poly(x)·η(|x|)` with `η = 1` on `[0, plateau]` and `0` beyond `radius`.
    pub fn plateau_poly(coeffs: &[f64], plateau: f64, radius: f64) -> Self {
        let c: Vec<f64> = coeffs.to_vec();
        Self::new((-radius, radius), move |x| {
            let mut p = [0.0; 3];
            for a in c.iter().rev() {
                p[2] = p[2] * x + 2.0 * p[1];
                p[1] = p[1] * x + p[0];
                p[0] = p[0] * x + a;
            }
            let e = ramp_down(x.abs(), plateau, radius);
            let s = if x < 0.0 { -1.0 } else { 1.0 };
            let e = [e[0], s * e[1], e[2]];
            [p[0] * e[0], p[1] * e[0] + p[0] * e[1], p[2] * e[0] + 2.0 * p[1] * e[1] + p[0] * e[2]]
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        let f = self.f.clone();
        Self { f: Arc::new(move |x| f(x).map(|v| s * v)), support: self.support, kinks: self.kinks.clone() }
    }

    pub fn add(&self, o: &Data1d) -> Self {
        let (a, b) = (self.clone(), o.clone());
        let support = (self.support.0.min(o.support.0), self.support.1.max(o.support.1));
        let mut kinks = self.kinks.clone();
        kinks.extend_from_slice(&o.kinks);
        Self {
            f: Arc::new(move |x| {
                let (u, v) = (a.eval(x), b.eval(x));
                [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
            }),
            support,
            kinks,
        }
    }

    pub fn sub(&self, o: &Data1d) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// Keeps `x ≥ 0` and extends to `x < 0` by `Σ c_j f(−jx)`, which matches
    /// value and two derivatives at the origin.
    pub fn reflect_left(&self) -> Self {
        let a = self.clone();
        let hi = self.support.1.max(0.0);
        Self {
            f: Arc::new(move |x| if x >= 0.0 { a.eval(x) } else { reflected(&a, x) }),
            support: (-hi, hi),
            kinks: self.kinks.iter().copied().filter(|k| *k >= 0.0).collect(),
        }
    }

    /// Keeps `x ≤ 0` and extends to `x > 0` by reflection.
    pub fn reflect_right(&self) -> Self {
        let a = self.clone();
        let lo = self.support.0.min(0.0);
        Self {
            f: Arc::new(move |x| if x <= 0.0 { a.eval(x) } else { reflected(&a, x) }),
            support: (lo, -lo),
            kinks: self.kinks.iter().copied().filter(|k| *k <= 0.0).collect(),
        }
    }

    /// `f` on `x ≥ 0`, zero on `x < 0`.
    pub fn positive_part(&self) -> Self {
        let a = self.clone();
        let mut kinks = vec![0.0];
        kinks.extend(self.kinks.iter().copied().filter(|k| *k > 0.0));
        Self {
            f: Arc::new(move |x| if x >= 0.0 { a.eval(x) } else { [0.0; 3] }),
            support: (0.0f64.max(self.support.0), self.support.1.max(0.0)),
            kinks,
        }
    }

    /// `f` on `x < 0`, zero on `x ≥ 0`.
    pub fn negative_part(&self) -> Self {
        let a = self.clone();
        let mut kinks = vec![0.0];
        kinks.extend(self.kinks.iter().copied().filter(|k| *k < 0.0));
        Self {
            f: Arc::new(move |x| if x < 0.0 { a.eval(x) } else { [0.0; 3] }),
            support: (self.support.0.min(0.0), 0.0f64.min(self.support.1)),
            kinks,
        }
    }

    /// `left` on `x < 0`, `right` on `x ≥ 0`.
    pub fn splice(left: &Data1d, right: &Data1d) -> Self {
        left.negative_part().add(&right.positive_part())
    }

    /// `f(s·x)` for `s > 0`.
    pub fn scale_arg(&self, s: f64) -> Self {
        let a = self.clone();
        Self {
            f: Arc::new(move |x| {
                let v = a.eval(s * x);
                [v[0], s * v[1], s * s * v[2]]
            }),
            support: (self.support.0 / s, self.support.1 / s),
            kinks: self.kinks.iter().map(|k| k / s).collect(),
        }
    }

    /// `f(−x)`.
    pub fn mirror(&self) -> Self {
        let a = self.clone();
        Self {
            f: Arc::new(move |x| {
                let v = a.eval(-x);
                [v[0], -v[1], v[2]]
            }),
            support: (-self.support.1, -self.support.0),
            kinks: self.kinks.iter().map(|k| -k).collect(),
        }
    }

    /// `[f', f'', NaN]`.
    pub fn derivative(&self) -> Self {
        let a = self.clone();
        Self {
            f: Arc::new(move |x| {
                let v = a.eval(x);
                [v[1], v[2], f64::NAN]
            }),
            support: self.support,
            kinks: self.kinks.clone(),
        }
    }

    /// Restricts the reported support; the caller asserts `f` vanishes outside.
    pub fn with_support(mut self, support: (f64, f64)) -> Self {
        self.support = support;
        self
    }

    /// Piecewise cubic Hermite interpolant of `f` on nodes spaced about `h`,
    /// with kinks kept as nodes. Intended for smooth data that is expensive
    /// to evaluate.
    pub fn tabulate(&self, h: f64) -> Self {
        let (lo, hi) = self.support;
        if !(lo < hi) {
            return Self::zero();
        }
        let mut cuts = vec![lo];
        cuts.extend(self.kinks.iter().copied().filter(|k| *k > lo && *k < hi));
        cuts.push(hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut xs = Vec::new();
        for w in cuts.windows(2) {
            let n = (((w[1] - w[0]) / h).ceil() as usize).max(1);
            for i in 0..n {
                xs.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
            }
        }
        xs.push(hi);
        let vals: Vec<[f64; 2]> = xs
            .iter()
            .map(|&x| {
                let v = self.eval(x);
                [v[0], v[1]]
            })
            .collect();
        let kinks = self.kinks.clone();
        Self {
            f: Arc::new(move |x| {
                let i = match xs.binary_search_by(|a| a.partial_cmp(&x).unwrap()) {
                    Ok(i) => i.min(xs.len() - 2),
                    Err(i) => i.saturating_sub(1).min(xs.len() - 2),
                };
                let (x0, x1) = (xs[i], xs[i + 1]);
                let hh = x1 - x0;
                let t = (x - x0) / hh;
                let (a, b) = (vals[i], vals[i + 1]);
                let (h00, h10, h01, h11) = (
                    [2.0 * t * t * t - 3.0 * t * t + 1.0, 6.0 * t * t - 6.0 * t, 12.0 * t - 6.0],
                    [t * t * t - 2.0 * t * t + t, 3.0 * t * t - 4.0 * t + 1.0, 6.0 * t - 4.0],
                    [-2.0 * t * t * t + 3.0 * t * t, -6.0 * t * t + 6.0 * t, -12.0 * t + 6.0],
                    [t * t * t - t * t, 3.0 * t * t - 2.0 * t, 6.0 * t - 2.0],
                );
                let sc = [1.0, 1.0 / hh, 1.0 / (hh * hh)];
                let mut out = [0.0; 3];
                for k in 0..3 {
                    out[k] = (h00[k] * a[0] + h10[k] * hh * a[1] + h01[k] * b[0] + h11[k] * hh * b[1]) * sc[k];
                }
                out
            }),
            support: self.support,
            kinks,
        }
    }

    /// `(a·∇w)(x, 0)` and its `x`-derivative, for a field `w`.
    pub fn bottom_trace(w: &ExtensionField, a: [f64; 2]) -> Self {
        let bb = w.support_box();
        let w = w.clone();
        Self::new((bb[0], bb[1]), move |x| {
            let j = w.jet([x, 0.0]);
            [a[0] * j.g[0] + a[1] * j.g[1], a[0] * j.h[0] + a[1] * j.h[1], f64::NAN]
        })
    }

    /// `w(x, 0)` with two derivatives.
    pub fn bottom_value(w: &ExtensionField) -> Self {
        let bb = w.support_box();
        let w = w.clone();
        Self::new((bb[0], bb[1]), move |x| {
            let j = w.jet([x, 0.0]);
            [j.v, j.g[0], j.h[0]]
        })
    }
}

fn reflected(a: &Data1d, x: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, c) in REFLECTION.iter().enumerate() {
        let k = (j + 1) as f64;
        let v = a.eval(-k * x);
        out[0] += c * v[0];
        out[1] -= c * k * v[1];
        out[2] += c * k * k * v[2];
    }
    out
}
