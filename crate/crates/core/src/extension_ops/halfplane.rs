use alloc::format;

use super::cutoff::{PlateauCutoff, SUPPORT};
use super::data::Data1d;
use super::field::ExtensionField;
use super::kernel::t_x_extend;
use super::quadrant::{EdgeCondition, TABLE_STEP};
use super::COMPAT_TOL;
use crate::{Error, Result};

const S: (f64, f64) = (-SUPPORT, SUPPORT);

fn phi(t: f64) -> [f64; 3] {
    PlateauCutoff.eval(t)
}

fn value_match(a: &Data1d, b: &Data1d) -> Result<()> {
    let d = (a.value(0.0) - b.value(0.0)).abs();
    if d > COMPAT_TOL {
        return Err(Error::Incompatible(format!("data disagree at the split point by {d}")));
    }
    Ok(())
}

/// `d(x)φ(y)`.
fn lift(d: Data1d) -> ExtensionField {
    let s = d.support;
    ExtensionField::separable(s, S, move |x| d.eval(x), phi)
}

/// Extension for the upper half-plane with the boundary `y = 0` split at
/// the origin: `left` applies on `x < 0`, `right` on `x > 0`. Oblique
/// conditions read `−∂_y w + β∂_x w = g` on either side.
pub fn halfplane_extension(left: &EdgeCondition, right: &EdgeCondition) -> Result<ExtensionField> {
    use EdgeCondition::*;
    match (left, right) {
        (Dirichlet(h), Dirichlet(g)) => {
            value_match(h, g)?;
            Ok(lift(Data1d::splice(h, g)))
        }
        (Dirichlet(h), Oblique { coef, data }) => Ok(dirichlet_oblique(h, data, *coef)),
        (Oblique { coef, data }, Dirichlet(g)) => {
            let w = dirichlet_oblique(&g.mirror(), &data.mirror(), -coef);
            Ok(w.pullback_affine([[-1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]))
        }
        (Oblique { coef: alpha, data: h }, Oblique { coef: beta, data: g }) => oblique_oblique(h, g, *alpha, *beta),
    }
}

/// Dirichlet `h` on `x < 0`, oblique `β` with data `g` on `x > 0`.
fn dirichlet_oblique(h: &Data1d, g: &Data1d, beta: f64) -> ExtensionField {
    let ht = h.reflect_right();
    let gt = g.reflect_left();
    let data = gt.sub(&ht.derivative().scale(beta));
    lift(ht).add(&t_x_extend(&data))
}

fn oblique_oblique(h: &Data1d, g: &Data1d, alpha: f64, beta: f64) -> Result<ExtensionField> {
    if alpha == beta {
        value_match(h, g)?;
        return Ok(t_x_extend(&Data1d::splice(h, g)));
    }
    let ht = h.reflect_right();
    let v = t_x_extend(&ht);
    let g1 = g.sub(&ht);
    let [a, b, _] = g1.eval(0.0);
    let k = 1.0 / (beta - alpha);
    let p = move |x: f64| [a * x + 0.5 * b * x * x, a + b * x, b];
    let phip = move |x: f64| {
        let (f, q) = (phi(x), p(x));
        [f[0] * q[0], f[1] * q[0] + f[0] * q[1], f[2] * q[0] + 2.0 * f[1] * q[1] + f[0] * q[2]]
    };
    let phidp = move |x: f64| {
        let f = phi(x);
        let q = [a + b * x, b, 0.0];
        [f[0] * q[0], f[1] * q[0] + f[0] * q[1], f[2] * q[0] + 2.0 * f[1] * q[1] + f[0] * q[2]]
    };
    let ymom = |y: f64| {
        let f = phi(y);
        [y * f[0], f[0] + y * f[1], 2.0 * f[1] + y * f[2]]
    };
    let c = ExtensionField::separable(S, S, phip, phi)
        .scale(k)
        .add(&ExtensionField::separable(S, S, phidp, ymom).scale(alpha * k));
    let r_plus = g1.sub(&Data1d::bottom_trace(&c, [beta, -1.0]));
    let r_minus = Data1d::bottom_trace(&c, [alpha, -1.0]).scale(-1.0);
    let r = Data1d::splice(&r_minus.tabulate(TABLE_STEP), &r_plus.tabulate(TABLE_STEP));
    Ok(ExtensionField::sum(&[v, c, t_x_extend(&r)]))
}
