use alloc::vec::Vec;

use super::cutoff::{PlateauCutoff, PLATEAU, SUPPORT};
use super::data::Data1d;
use super::field::{BBox, ExtensionField, Field2d};
use crate::domain::Point;
use crate::jet::Jet2;
use crate::quadrature::integrate_fixed;

/// Panels per piece between breakpoints.
const PANELS: usize = 16;

struct KernelX {
    g: Data1d,
    bbox: BBox,
}

impl KernelX {
    /// `u = −y∫φ(t) g(x − ty) dt` with its first and second derivatives.
    fn inner(&self, x: f64, y: f64) -> Jet2 {
        if y == 0.0 {
            let g = self.g.eval(x);
            return Jet2 { v: 0.0, g: [0.0, -g[0]], h: [0.0, -g[1], 0.0] };
        }
        let reach = SUPPORT * y.abs();
        if x + reach < self.g.support.0 || x - reach > self.g.support.1 {
            return Jet2::ZERO;
        }
        let mut br: Vec<f64> = Vec::with_capacity(8);
        br.extend_from_slice(&[-SUPPORT, -PLATEAU, 0.0, PLATEAU, SUPPORT]);
        for &k in self.g.kinks.iter().chain([self.g.support.0, self.g.support.1].iter()) {
            let t = (x - k) / y;
            if t > -SUPPORT && t < SUPPORT {
                br.push(t);
            }
        }
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        br.dedup();
        let phi = PlateauCutoff;
        let g = &self.g;
        let i = integrate_fixed(
            |t| {
                let [p, dp, _] = phi.eval(t);
                let [gv, gd, _] = g.eval(x - t * y);
                [p * gv, dp * gv, t * dp * gv, dp * gd, t * dp * gd, t * t * dp * gd]
            },
            &br,
            PANELS,
        );
        Jet2 { v: -y * i[0], g: [-i[1], i[2]], h: [-i[3], i[4], -i[5]] }
    }
}

impl Field2d for KernelX {
    fn jet(&self, p: Point) -> Jet2 {
        let [x, y] = p;
        let c = PlateauCutoff.eval(y);
        if c == [0.0; 3] {
            return Jet2::ZERO;
        }
        Jet2::of_y(c).mul(self.inner(x, y))
    }

    fn support_box(&self) -> BBox {
        self.bbox
    }
}

/// `T_X(g)(x, y) = φ(y)·(−y∫φ(t) g(x − ty) dt)`: zero trace on `y = 0`
/// and `−∂_y T_X(g)(x, 0) = g(x)`.
pub fn t_x_extend(g: &Data1d) -> ExtensionField {
    let (lo, hi) = g.support;
    if !(lo < hi) {
        return ExtensionField::zero();
    }
    let r = SUPPORT * SUPPORT;
    ExtensionField::new(KernelX { g: g.clone(), bbox: [lo - r, hi + r, -SUPPORT, SUPPORT] })
}

/// `T_Y(h)(x, y) = T_X(h)(y, x)`.
pub fn t_y_extend(h: &Data1d) -> ExtensionField {
    t_x_extend(h).swap_xy()
}
