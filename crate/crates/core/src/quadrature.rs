//! Adaptive Gauss–Legendre quadrature for vector-valued integrands.

const GL10: [(f64, f64); 10] = [
    (-0.9739065285171717, 0.06667134430868807),
    (-0.8650633666889845, 0.14945134915058036),
    (-0.6794095682990244, 0.219086362515982),
    (-0.4333953941292472, 0.2692667193099965),
    (-0.14887433898163122, 0.295524224714753),
    (0.14887433898163122, 0.295524224714753),
    (0.4333953941292472, 0.2692667193099965),
    (0.6794095682990244, 0.219086362515982),
    (0.8650633666889845, 0.14945134915058036),
    (0.9739065285171717, 0.06667134430868807),
];

const MAX_DEPTH: u32 = 40;

fn gl10<const K: usize, F: FnMut(f64) -> [f64; K]>(f: &mut F, a: f64, b: f64) -> [f64; K] {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = [0.0; K];
    for &(x, w) in GL10.iter() {
        let v = f(m + r * x);
        for k in 0..K {
            acc[k] += w * v[k];
        }
    }
    for v in acc.iter_mut() {
        *v *= r;
    }
    acc
}

fn refine<const K: usize, F: FnMut(f64) -> [f64; K]>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: [f64; K],
    tol: f64,
    depth: u32,
) -> [f64; K] {
    let m = 0.5 * (a + b);
    let left = gl10(f, a, m);
    let right = gl10(f, m, b);
    let mut both = [0.0; K];
    let mut err: f64 = 0.0;
    for k in 0..K {
        both[k] = left[k] + right[k];
        err = err.max((both[k] - whole[k]).abs());
    }
    if err <= tol || depth >= MAX_DEPTH {
        return both;
    }
    let l = refine(f, a, m, left, 0.5 * tol, depth + 1);
    let r = refine(f, m, b, right, 0.5 * tol, depth + 1);
    let mut out = [0.0; K];
    for k in 0..K {
        out[k] = l[k] + r[k];
    }
    out
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` per component.
pub fn integrate<const K: usize, F: FnMut(f64) -> [f64; K]>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> [f64; K] {
    if b <= a {
        return [0.0; K];
    }
    let whole = gl10(&mut f, a, b);
    refine(&mut f, a, b, whole, tol, 0)
}

/// Integrates over consecutive breakpoints, splitting the tolerance.
pub fn integrate_pieces<const K: usize, F: FnMut(f64) -> [f64; K]>(
    mut f: F,
    breaks: &[f64],
    tol: f64,
) -> [f64; K] {
    let mut out = [0.0; K];
    if breaks.len() < 2 {
        return out;
    }
    let t = tol / (breaks.len() - 1) as f64;
    for w in breaks.windows(2) {
        let v = integrate(&mut f, w[0], w[1], t);
        for k in 0..K {
            out[k] += v[k];
        }
    }
    out
}

/// Composite rule with `panels` equal panels between consecutive breakpoints.
/// The nodes do not depend on `f`, so the result is linear in `f`.
pub fn integrate_fixed<const K: usize, F: FnMut(f64) -> [f64; K]>(
    mut f: F,
    breaks: &[f64],
    panels: usize,
) -> [f64; K] {
    let mut out = [0.0; K];
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        if h <= 0.0 {
            continue;
        }
        for i in 0..panels {
            let a = w[0] + h * i as f64;
            let v = gl10(&mut f, a, a + h);
            for k in 0..K {
                out[k] += v[k];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Float;

    /// Legendre nodes by Newton on P_10, as an independent check of the table.
    fn legendre_nodes() -> [(f64, f64); 10] {
        let n = 10;
        let mut out = [(0.0, 0.0); 10];
        for i in 0..n {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out[n - 1 - i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    }

    #[test]
    fn table_matches_newton_nodes() {
        let nodes = legendre_nodes();
        for (a, b) in GL10.iter().zip(nodes.iter()) {
            assert!((a.0 - b.0).abs() < 1e-14);
            assert!((a.1 - b.1).abs() < 1e-14);
        }
    }

    #[test]
    fn integrates_smooth_and_steep() {
        let v = integrate(|x| [x.exp(), (50.0 * x).sin()], 0.0, 2.0, 1e-12);
        assert!((v[0] - (2.0f64.exp() - 1.0)).abs() < 1e-12);
        assert!((v[1] - (1.0 - 100.0f64.cos()) / 50.0).abs() < 1e-11);
    }
}
