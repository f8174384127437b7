//! Second-order jets of scalar functions of two variables.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Value, gradient and Hessian `[xx, xy, yy]` at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [f64; 3],
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, g: [0.0; 2], h: [0.0; 3] };

    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Self::ZERO }
    }

    /// Jet of `f(x)` where `f` has value and derivatives `[f, f', f'']`.
    pub fn of_x(f: [f64; 3]) -> Self {
        Jet2 { v: f[0], g: [f[1], 0.0], h: [f[2], 0.0, 0.0] }
    }

    /// Jet of `f(y)`.
    pub fn of_y(f: [f64; 3]) -> Self {
        Jet2 { v: f[0], g: [0.0, f[1]], h: [0.0, 0.0, f[2]] }
    }

    /// Jet of the coordinate function `x`.
    pub fn x(x: f64) -> Self {
        Self::of_x([x, 1.0, 0.0])
    }

    pub fn y(y: f64) -> Self {
        Self::of_y([y, 1.0, 0.0])
    }

    /// Product rule.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            g: [self.g[0] * o.v + self.v * o.g[0], self.g[1] * o.v + self.v * o.g[1]],
            h: [
                self.h[0] * o.v + 2.0 * self.g[0] * o.g[0] + self.v * o.h[0],
                self.h[1] * o.v + self.g[0] * o.g[1] + self.g[1] * o.g[0] + self.v * o.h[1],
                self.h[2] * o.v + 2.0 * self.g[1] * o.g[1] + self.v * o.h[2],
            ],
        }
    }

    /// `f ∘ self` for a scalar function with `[f, f', f'']`.
    pub fn compose(self, f: [f64; 3]) -> Jet2 {
        Jet2 {
            v: f[0],
            g: [f[1] * self.g[0], f[1] * self.g[1]],
            h: [
                f[2] * self.g[0] * self.g[0] + f[1] * self.h[0],
                f[2] * self.g[0] * self.g[1] + f[1] * self.h[1],
                f[2] * self.g[1] * self.g[1] + f[1] * self.h[2],
            ],
        }
    }

    /// Exchanges the roles of `x` and `y`.
    pub fn swap_xy(self) -> Jet2 {
        Jet2 { v: self.v, g: [self.g[1], self.g[0]], h: [self.h[2], self.h[1], self.h[0]] }
    }

    /// Jet of `u(M p + c)` given the jet of `u` at `M p + c`, with `M` row-major.
    pub fn pullback_linear(self, m: [[f64; 2]; 2]) -> Jet2 {
        let g = [
            self.g[0] * m[0][0] + self.g[1] * m[1][0],
            self.g[0] * m[0][1] + self.g[1] * m[1][1],
        ];
        let hm = [[self.h[0], self.h[1]], [self.h[1], self.h[2]]];
        let q = |a: usize, b: usize| {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += m[k][a] * hm[k][l] * m[l][b];
                }
            }
            s
        };
        Jet2 { v: self.v, g, h: [q(0, 0), q(0, 1), q(1, 1)] }
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0] + self.h[2]
    }

    pub fn directional(&self, d: [f64; 2]) -> f64 {
        self.g[0] * d[0] + self.g[1] * d[1]
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.v.abs();
        for x in self.g.iter().chain(self.h.iter()) {
            m = m.max(x.abs());
        }
        m
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
            h: [self.h[0] + o.h[0], self.h[1] + o.h[1], self.h[2] + o.h[2]],
        }
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Jet2) {
        *self = *self + o;
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        Jet2 { v: self.v * s, g: [self.g[0] * s, self.g[1] * s], h: [self.h[0] * s, self.h[1] * s, self.h[2] * s] }
    }
}
