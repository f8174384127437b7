//! Smooth step profiles built from `exp(-1/s)`.
//!
//! All functions return `[value, first derivative, second derivative]`.

#[allow(unused_imports)]
use num_traits::Float;

/// `e(s) = exp(-1/s)` for `s > 0`, zero otherwise.
fn bump_tail(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        return [0.0; 3];
    }
    let inv = 1.0 / s;
    let e = (-inv).exp();
    if e == 0.0 {
        return [0.0; 3];
    }
    // e' = e/s^2, e'' = e (1 - 2s)/s^4
    let d1 = (-inv - 2.0 * s.ln()).exp();
    let d2 = (-inv - 4.0 * s.ln()).exp() * (1.0 - 2.0 * s);
    [e, d1, d2]
}

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`, C^∞ in between.
pub fn step(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if s >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let a = bump_tail(s);
    let b0 = bump_tail(1.0 - s);
    let b = [b0[0], -b0[1], b0[2]];
    let d = a[0] + b[0];
    let dd = a[1] + b[1];
    let n = a[1] * b[0] - a[0] * b[1];
    let dn = a[2] * b[0] - a[0] * b[2];
    [a[0] / d, n / (d * d), (dn * d - 2.0 * n * dd) / (d * d * d)]
}

/// Non-increasing profile in `r`: 1 on `[.., a]`, 0 on `[b, ..]`.
pub fn ramp_down(r: f64, a: f64, b: f64) -> [f64; 3] {
    let w = b - a;
    let s = step((b - r) / w);
    [s[0], -s[1] / w, s[2] / (w * w)]
}

/// Radial cutoff `η(|p - c|)` with its gradient and Hessian.
///
/// Returns `(value, [dx, dy], [dxx, dxy, dyy])`.
pub fn radial(p: [f64; 2], c: [f64; 2], a: f64, b: f64) -> (f64, [f64; 2], [f64; 3]) {
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    let r = (dx * dx + dy * dy).sqrt();
    if r >= b {
        return (0.0, [0.0; 2], [0.0; 3]);
    }
    if r <= a {
        return (1.0, [0.0; 2], [0.0; 3]);
    }
    let [v, d1, d2] = ramp_down(r, a, b);
    let (ux, uy) = (dx / r, dy / r);
    let g = [d1 * ux, d1 * uy];
    let t = d1 / r;
    let h = [
        d2 * ux * ux + t * (1.0 - ux * ux),
        d2 * ux * uy - t * ux * uy,
        d2 * uy * uy + t * (1.0 - uy * uy),
    ];
    (v, g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limits_and_symmetry() {
        assert_eq!(step(-0.5)[0], 0.0);
        assert_eq!(step(1.5)[0], 1.0);
        for k in 1..50 {
            let s = k as f64 / 50.0;
            let a = step(s);
            let b = step(1.0 - s);
            assert!((a[0] + b[0] - 1.0).abs() < 1e-14);
            assert!((a[1] - b[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn step_derivatives_match_differences() {
        let h = 1e-5;
        for k in 1..40 {
            let s = 0.02 + k as f64 * 0.024;
            let fd1 = (step(s + h)[0] - step(s - h)[0]) / (2.0 * h);
            let fd2 = (step(s + h)[1] - step(s - h)[1]) / (2.0 * h);
            assert!((fd1 - step(s)[1]).abs() < 1e-7, "{s}");
            assert!((fd2 - step(s)[2]).abs() < 1e-5, "{s}");
        }
    }
}
