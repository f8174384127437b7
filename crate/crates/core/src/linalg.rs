//! Banded LU factorization and singular value estimates.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Square band matrix in LAPACK `gbtrf` layout with room for pivot fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, ld, data: vec![0.0; ld * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) + self.ld * j
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::InvalidArgument(alloc::format!("entry ({i},{j}) outside band")));
        }
        let k = self.idx(i, j);
        self.data[k] = v;
        Ok(())
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::InvalidArgument(alloc::format!("entry ({i},{j}) outside band")));
        }
        let k = self.idx(i, j);
        self.data[k] += v;
        Ok(())
    }

    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.idx(i, j);
            self.data[k] = 0.0;
        }
    }

    /// Scales row `i` by `s`.
    pub fn scale_row(&mut self, i: usize, s: f64) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.idx(i, j);
            self.data[k] *= s;
        }
    }

    /// Largest absolute entry of row `i`.
    pub fn row_max(&self, i: usize) -> f64 {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        (lo..=hi).map(|j| self.get(i, j).abs()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.data[self.idx(i, j)] * xj;
            }
        }
        y
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let mut s = 0.0;
            for i in lo..=hi {
                s += self.data[self.idx(i, j)] * x[i];
            }
            y[j] = s;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// LU with partial pivoting. Fails on an exactly zero pivot.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kv = self.kl + self.ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = self.kl.min(n - 1 - j);
            let base = self.ld * j + kv;
            let mut jp = 0;
            let mut best = self.data[base].abs();
            for r in 1..=km {
                let v = self.data[base + r].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(j));
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + jp, c);
                    self.data.swap(a, b);
                }
            }
            if km > 0 {
                let piv = self.data[base];
                for r in 1..=km {
                    self.data[base + r] /= piv;
                }
                for c in (j + 1)..=ju {
                    let f = self.data[self.idx(j, c)];
                    if f == 0.0 {
                        continue;
                    }
                    let cb = self.idx(j, c);
                    for r in 1..=km {
                        let l = self.data[base + r];
                        self.data[cb + r] -= l * f;
                    }
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

/// Factored band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.m.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let n = m.n;
        let kv = m.kl + m.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = m.kl.min(n - 1 - j);
            let base = m.ld * j + kv;
            let xj = x[j];
            for r in 1..=km {
                x[j + r] -= m.data[base + r] * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= m.data[m.ld * j + kv];
            let xj = x[j];
            for i in j.saturating_sub(kv)..j {
                x[i] -= m.data[m.idx(i, j)] * xj;
            }
        }
        x
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let n = m.n;
        let kv = m.kl + m.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let mut s = x[j];
            for i in j.saturating_sub(kv)..j {
                s -= m.data[m.idx(i, j)] * x[i];
            }
            x[j] = s / m.data[m.ld * j + kv];
        }
        for j in (0..n).rev() {
            let km = m.kl.min(n - 1 - j);
            let base = m.ld * j + kv;
            let mut s = 0.0;
            for r in 1..=km {
                s += m.data[base + r] * x[j + r];
            }
            x[j] -= s;
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
        }
        x
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn seed_vector(n: usize, k: usize) -> Vec<f64> {
    // deterministic, not aligned with any grid mode
    (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * (0.6180339887498949 + 0.1 * k as f64);
            (t - t.floor()) - 0.5 + 1e-3 * ((i * (k + 3)) % 7) as f64
        })
        .collect()
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn sigma_max(a: &BandMatrix, iters: usize) -> f64 {
    let mut x = seed_vector(a.n, 0);
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut s = 0.0;
    for _ in 0..iters {
        let y = a.matvec(&x);
        let z = a.matvec_transpose(&y);
        let nz = norm(&z);
        if nz == 0.0 {
            return 0.0;
        }
        let s_new = nz.sqrt();
        x = z.into_iter().map(|v| v / nz).collect();
        if (s_new - s).abs() <= 1e-10 * s_new {
            s = s_new;
            break;
        }
        s = s_new;
    }
    norm(&a.matvec(&x)).max(s * 0.0)
}

/// Smallest `k` singular values (ascending) by block inverse iteration
/// on `AᵀA`, with Rayleigh–Ritz on the converged subspace.
pub fn smallest_singular_values(lu: &BandLu, k: usize, iters: usize) -> Vec<f64> {
    let n = lu.dim();
    let k = k.min(n);
    let mut q: Vec<Vec<f64>> = (0..k).map(|i| seed_vector(n, i + 1)).collect();
    orthonormalize(&mut q);
    let mut prev = vec![f64::INFINITY; k];
    let mut out = prev.clone();
    for _ in 0..iters {
        let mut z: Vec<Vec<f64>> = q.iter().map(|v| lu.solve(&lu.solve_transpose(v))).collect();
        orthonormalize(&mut z);
        // Rayleigh–Ritz for (AᵀA)^{-1} on span(z)
        let w: Vec<Vec<f64>> = z.iter().map(|v| lu.solve_transpose(v)).collect();
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&w[i], &w[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut next = Vec::with_capacity(k);
        for (slot, &c) in order.iter().enumerate() {
            let lam = eig.eigenvalues[c].max(0.0);
            out[slot] = if lam > 0.0 { 1.0 / lam.sqrt() } else { f64::INFINITY };
            let mut v = vec![0.0; n];
            for (i, zi) in z.iter().enumerate() {
                let c_i = eig.eigenvectors[(i, c)];
                for (a, b) in v.iter_mut().zip(zi) {
                    *a += c_i * b;
                }
            }
            next.push(v);
        }
        q = next;
        let done = out.iter().zip(&prev).all(|(a, b)| b.is_finite() && (a - b).abs() <= 1e-10 * b.abs());
        prev.clone_from(&out);
        if done {
            break;
        }
    }
    out
}

fn orthonormalize(q: &mut [Vec<f64>]) {
    for i in 0..q.len() {
        for _ in 0..2 {
            for j in 0..i {
                let (a, b) = q.split_at_mut(i);
                let d = dot(&b[0], &a[j]);
                for (x, y) in b[0].iter_mut().zip(&a[j]) {
                    *x -= d * y;
                }
            }
        }
        let nv = norm(&q[i]);
        if nv > 0.0 {
            q[i].iter_mut().for_each(|v| *v /= nv);
        }
    }
}

/// Singular values of a dense matrix, ascending.
pub fn dense_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

/// Dimension at or below which singular values are computed densely.
pub const DENSE_LIMIT: usize = 900;

/// Smallest `k` singular values and the largest one, choosing a dense SVD
/// for small systems or when the band factorization breaks down.
pub fn singular_summary(a: &BandMatrix, k: usize) -> (Vec<f64>, f64) {
    if a.dim() <= DENSE_LIMIT {
        let s = dense_singular_values(&a.to_dense());
        let max = *s.last().unwrap_or(&0.0);
        return (s.into_iter().take(k).collect(), max);
    }
    let max = sigma_max(a, 500);
    match a.clone().factor() {
        Ok(lu) => (smallest_singular_values(&lu, k, 300), max),
        Err(_) => {
            let mut v = vec![0.0];
            v.resize(k.max(1), 0.0);
            (v, max)
        }
    }
}
