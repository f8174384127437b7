//! Partially free boundary minimal half disks in `N₊ = ({z ≥ 0}, g)`.
//!
//! An embedding is a nodal map `f: D₊ → ℝ³` on the Coons half-disk grid,
//! with `Γ₂` mapped into `∂N₊ = {z = 0}` and `Γ₁` onto a prescribed curve.
//! The residuals are the mean curvature against a transversal field `p`
//! and the contact angle `⟨n, p⟩` along `Γ₂`. Derivatives are grid stencils
//! converted with the discrete metric of the grid map, so affine embeddings
//! are differentiated exactly.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{make_half_disk_with, EdgeField, Point, GAMMA1};
use crate::grid_solver::{assemble, build_halfdisk_grid, solve, CurvGrid, GridField, Hess2, LinearSystem, LogicalStencil, Mat2, MixedBVP, NodeKind};
use crate::linalg::{singular_summary, BandMatrix};
use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
/// `Γ[m][k][l] = Γ^m_{kl}`.
pub type Christoffel = [[[f64; 3]; 3]; 3];
pub type MetricFn = Arc<dyn Fn(Vec3) -> Mat3 + Send + Sync>;
/// `∂_k g` for `k = 0, 1, 2`.
pub type MetricDerivFn = Arc<dyn Fn(Vec3) -> [Mat3; 3] + Send + Sync>;
/// `θ ↦ (γ(θ), γ'(θ))` for `θ ∈ [0, π]`, the polar angle on `Γ₁`.
pub type CurveFn = Arc<dyn Fn(f64) -> (Vec3, Vec3) + Send + Sync>;

const METRIC_FD_STEP: f64 = 1e-5;
const LIN_FD_STEP: f64 = 1e-6;
const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy(a: f64, x: Vec3, y: Vec3) -> Vec3 {
    [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]]
}

fn scale(a: f64, x: Vec3) -> Vec3 {
    [a * x[0], a * x[1], a * x[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

fn inner(g: &Mat3, u: Vec3, v: Vec3) -> f64 {
    dot(u, mat_vec(g, v))
}

fn inv3(m: &Mat3) -> Option<Mat3> {
    let c = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c(j, i) / det;
        }
    }
    Some(out)
}

fn inv2(m: Mat2) -> Option<Mat2> {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(d.abs() > 0.0) || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Smooth symmetric positive definite metric on the closed upper half space.
#[derive(Clone)]
pub struct MetricField {
    pub name: String,
    g: MetricFn,
    dg: Option<MetricDerivFn>,
}

impl core::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "MetricField({}, analytic derivative: {})", self.name, self.dg.is_some())
    }
}

impl MetricField {
    pub fn euclidean() -> Self {
        Self::with_derivative("euclidean", |_| IDENTITY, |_| [[[0.0; 3]; 3]; 3])
    }

    /// Metric without derivative access; Christoffel symbols use centered
    /// differences of step `1e-5`.
    pub fn from_fn(name: &str, g: impl Fn(Vec3) -> Mat3 + Send + Sync + 'static) -> Self {
        MetricField { name: name.into(), g: Arc::new(g), dg: None }
    }

    pub fn with_derivative(
        name: &str,
        g: impl Fn(Vec3) -> Mat3 + Send + Sync + 'static,
        dg: impl Fn(Vec3) -> [Mat3; 3] + Send + Sync + 'static,
    ) -> Self {
        MetricField { name: name.into(), g: Arc::new(g), dg: Some(Arc::new(dg)) }
    }

    /// `g = w δ` for a positive weight given with its gradient.
    pub fn isotropic(name: &str, w: impl Fn(Vec3) -> (f64, Vec3) + Send + Sync + 'static) -> Self {
        let w = Arc::new(w);
        let w2 = w.clone();
        Self::with_derivative(
            name,
            move |x| {
                let s = w(x).0;
                [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]]
            },
            move |x| {
                let d = w2(x).1;
                d.map(|dk| [[dk, 0.0, 0.0], [0.0, dk, 0.0], [0.0, 0.0, dk]])
            },
        )
    }

    /// `g = (1 + a ψ) δ` with `ψ = (1 − |x − c|²/R²)⁴` inside the ball of
    /// radius `R` about `c` and `0` outside.
    pub fn bump(amplitude: f64, center: Vec3, radius: f64) -> Self {
        Self::isotropic("bump", move |x| {
            let (psi, dpsi) = bump_profile(x, center, radius);
            (1.0 + amplitude * psi, scale(amplitude, dpsi))
        })
    }

    /// `g = (1 + a e^{−y²/2σ²}) δ`, a ridge centred on the plane `y = 0`
    /// (second coordinate). Reflections in `y` and `z` are isometries.
    pub fn ridge(amplitude: f64, width: f64) -> Self {
        let mut m = Self::isotropic("ridge", move |x| {
            let e = (-x[1] * x[1] / (2.0 * width * width)).exp();
            (1.0 + amplitude * e, [0.0, -amplitude * e * x[1] / (width * width), 0.0])
        });
        m.name = format!("ridge(a={amplitude}, width={width})");
        m
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.dg.is_some()
    }

    pub fn eval(&self, x: Vec3) -> Mat3 {
        (self.g)(x)
    }

    /// `[∂₀g, ∂₁g, ∂₂g]`, analytic when available.
    pub fn derivative(&self, x: Vec3) -> [Mat3; 3] {
        if let Some(dg) = &self.dg {
            return dg(x);
        }
        let s = METRIC_FD_STEP;
        let mut out = [[[0.0; 3]; 3]; 3];
        for (k, ok) in out.iter_mut().enumerate() {
            let mut xp = x;
            let mut xm = x;
            xp[k] += s;
            xm[k] -= s;
            let (gp, gm) = (self.eval(xp), self.eval(xm));
            for i in 0..3 {
                for j in 0..3 {
                    ok[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * s);
                }
            }
        }
        out
    }

    /// `Γ^m_{kl} = ½ g^{mn}(∂_k g_{nl} + ∂_l g_{nk} − ∂_n g_{kl})`, filled
    /// symmetrically in `k, l`.
    pub fn christoffel(&self, x: Vec3) -> Christoffel {
        let gi = inv3(&self.eval(x)).unwrap_or(IDENTITY);
        let dg = self.derivative(x);
        let mut low = [[[0.0; 3]; 3]; 3];
        for n in 0..3 {
            for k in 0..3 {
                for l in k..3 {
                    let v = 0.5 * (dg[k][n][l] + dg[l][n][k] - dg[n][k][l]);
                    low[n][k][l] = v;
                    low[n][l][k] = v;
                }
            }
        }
        let mut out = [[[0.0; 3]; 3]; 3];
        for m in 0..3 {
            for k in 0..3 {
                for l in k..3 {
                    let v = (0..3).map(|n| gi[m][n] * low[n][k][l]).sum();
                    out[m][k][l] = v;
                    out[m][l][k] = v;
                }
            }
        }
        out
    }

    pub fn inner(&self, x: Vec3, u: Vec3, v: Vec3) -> f64 {
        inner(&self.eval(x), u, v)
    }

    /// Exact symmetry and positive definiteness (leading minors) at samples.
    pub fn validate(&self, samples: &[Vec3]) -> Result<()> {
        for &x in samples {
            let g = self.eval(x);
            for i in 0..3 {
                for j in 0..i {
                    if g[i][j] != g[j][i] {
                        return Err(Error::InvalidArgument(format!("metric {} not symmetric at {x:?}", self.name)));
                    }
                }
            }
            let m1 = g[0][0];
            let m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let m3 = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
            if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
                return Err(Error::InvalidArgument(format!("metric {} not positive definite at {x:?}", self.name)));
            }
        }
        Ok(())
    }
}

/// `(1 − s²)⁴` with `s = |x − c|/R` and its gradient.
fn bump_profile(x: Vec3, c: Vec3, r: f64) -> (f64, Vec3) {
    let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
    let s2 = dot(d, d) / (r * r);
    if s2 >= 1.0 {
        return (0.0, [0.0; 3]);
    }
    let b = 1.0 - s2;
    (b.powi(4), scale(-8.0 * b.powi(3) / (r * r), d))
}

/// Discrete geometry of one grid node.
#[derive(Debug, Clone)]
struct NodeGeom {
    st: LogicalStencil,
    kinv: Mat2,
    hs: Hess2,
    degenerate: bool,
}

/// Coons half-disk grid with the node classes used by the minimal surface
/// system. Unknowns are the nodes off `Γ₁`; interior unknowns carry the
/// mean curvature equation, `Γ₂` unknowns the contact angle.
#[derive(Debug)]
pub struct HalfDiskMesh {
    pub grid: CurvGrid,
    geom: Vec<NodeGeom>,
    /// `Γ₁` nodes including both corners.
    pub gamma1: Vec<usize>,
    /// `Γ₂` nodes without the corners.
    pub gamma2: Vec<usize>,
    pub unknowns: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl HalfDiskMesh {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        let grid = build_halfdisk_grid(n)?;
        let geom = (0..grid.len())
            .map(|k| {
                let st = grid.stencil(k);
                let (jm, hs) = grid.discrete_metric(k);
                let a = grid.jac[k];
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                let kinv = inv2(jm);
                NodeGeom { st, kinv: kinv.unwrap_or([[0.0; 2]; 2]), hs, degenerate: det.abs() <= 1e-12 || kinv.is_none() }
            })
            .collect();
        let mut gamma1 = Vec::new();
        let mut gamma2 = Vec::new();
        let mut unknowns = Vec::new();
        let mut slot = vec![None; grid.len()];
        for (k, kind) in grid.kinds.iter().enumerate() {
            match kind {
                NodeKind::Edge { edge, .. } if *edge == GAMMA1 => gamma1.push(k),
                NodeKind::Corner { .. } | NodeKind::Vertex { .. } => gamma1.push(k),
                NodeKind::Edge { .. } => {
                    gamma2.push(k);
                    slot[k] = Some(unknowns.len());
                    unknowns.push(k);
                }
                NodeKind::Interior => {
                    slot[k] = Some(unknowns.len());
                    unknowns.push(k);
                }
            }
        }
        Ok(Arc::new(HalfDiskMesh { grid, geom, gamma1, gamma2, unknowns, slot }))
    }

    pub fn n(&self) -> usize {
        self.grid.nx
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn slot(&self, k: usize) -> Option<usize> {
        self.slot[k]
    }

    pub fn is_corner(&self, k: usize) -> bool {
        matches!(self.grid.kinds[k], NodeKind::Corner { .. })
    }

    pub fn on_gamma2(&self, k: usize) -> bool {
        self.grid.ij(k).1 == 0
    }

    /// Polar angle of a `Γ₁` node.
    pub fn theta(&self, k: usize) -> Option<f64> {
        match self.grid.kinds[k] {
            NodeKind::Edge { edge, t } if edge == GAMMA1 => Some(PI * t),
            NodeKind::Corner { corner: 1 } => Some(PI),
            NodeKind::Corner { corner: 2 } => Some(0.0),
            _ => None,
        }
    }

    /// Whether the grid map is singular at the node (the arc split points).
    pub fn is_degenerate(&self, k: usize) -> bool {
        self.geom[k].degenerate
    }

    /// Trapezoidal area weight in logical coordinates.
    fn area_weight(&self, k: usize) -> f64 {
        let (i, j) = self.grid.ij(k);
        let (hx, hy) = self.grid.h();
        let cx = if i == 0 || i == self.grid.nx { 0.5 } else { 1.0 };
        let cy = if j == 0 || j == self.grid.ny { 0.5 } else { 1.0 };
        cx * cy * hx * hy
    }

    /// Boundary sides as node runs with the logical direction along the run
    /// and the outward logical direction with its sign.
    fn sides(&self) -> Vec<Side> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let g = &self.grid;
        vec![
            Side { nodes: (0..=nx).map(|i| g.index(i, 0)).collect(), along: 0, out: 1, sign: -1.0, gamma2: true },
            Side { nodes: (0..=ny).map(|j| g.index(nx, j)).collect(), along: 1, out: 0, sign: 1.0, gamma2: false },
            Side { nodes: (0..=nx).rev().map(|i| g.index(i, ny)).collect(), along: 0, out: 1, sign: 1.0, gamma2: false },
            Side { nodes: (0..=ny).rev().map(|j| g.index(0, j)).collect(), along: 1, out: 0, sign: -1.0, gamma2: false },
        ]
    }

    /// Trapezoidal integral over one side of per-node values (already
    /// multiplied by the line element). Missing values at degenerate nodes
    /// are extrapolated quadratically from the run.
    fn side_integral(&self, side: &Side, mut vals: Vec<Option<f64>>) -> f64 {
        let m = vals.len();
        for idx in 0..m {
            if vals[idx].is_none() {
                let pick = |a: usize, b: usize, c: usize, v: &[Option<f64>]| match (v[a], v[b], v[c]) {
                    (Some(x), Some(y), Some(z)) => Some(3.0 * x - 3.0 * y + z),
                    _ => None,
                };
                let e = if idx + 3 < m { pick(idx + 1, idx + 2, idx + 3, &vals) } else { None };
                let e = e.or_else(|| if idx >= 3 { pick(idx - 1, idx - 2, idx - 3, &vals) } else { None });
                vals[idx] = Some(e.unwrap_or(0.0));
            }
        }
        let h = if side.along == 0 { self.grid.h().0 } else { self.grid.h().1 };
        vals.iter()
            .enumerate()
            .map(|(i, v)| v.unwrap_or(0.0) * if i == 0 || i == m - 1 { 0.5 * h } else { h })
            .sum()
    }
}

struct Side {
    nodes: Vec<usize>,
    along: usize,
    out: usize,
    sign: f64,
    gamma2: bool,
}

/// Value and logical derivatives `[ξ, η, ξξ, ξη, ηη]` of `f` at a node.
#[derive(Debug, Clone, Copy)]
struct LocalJet {
    x: Vec3,
    d: [Vec3; 5],
}

/// Physical first derivatives `[f_x, f_y]` and second `[f_xx, f_xy, f_yy]`.
fn physical(geom: &NodeGeom, d: &[Vec3; 5]) -> ([Vec3; 2], [Vec3; 3]) {
    let k = geom.kinv;
    let mut f1 = [[0.0; 3]; 2];
    for m in 0..2 {
        for c in 0..3 {
            f1[m][c] = d[0][c] * k[0][m] + d[1][c] * k[1][m];
        }
    }
    // logical second derivatives with the map curvature removed
    let mut corr = [[0.0; 3]; 3];
    for (ab, slot) in corr.iter_mut().enumerate() {
        for c in 0..3 {
            slot[c] = d[2 + ab][c] - f1[0][c] * geom.hs[0][ab] - f1[1][c] * geom.hs[1][ab];
        }
    }
    let lg = |a: usize, b: usize| -> Vec3 {
        match (a, b) {
            (0, 0) => corr[0],
            (1, 1) => corr[2],
            _ => corr[1],
        }
    };
    let mut f2 = [[0.0; 3]; 3];
    for (idx, (m, n)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let w = k[a][m] * k[b][n];
                let v = lg(a, b);
                for c in 0..3 {
                    f2[idx][c] += w * v[c];
                }
            }
        }
    }
    (f1, f2)
}

/// Induced metric `ĝ_ij = ⟨f_i, f_j⟩_g` and its inverse.
fn induced(g: &Mat3, f1: &[Vec3; 2]) -> Option<(Mat2, Mat2)> {
    let gh = [[inner(g, f1[0], f1[0]), inner(g, f1[0], f1[1])], [inner(g, f1[1], f1[0]), inner(g, f1[1], f1[1])]];
    let det = gh[0][0] * gh[1][1] - gh[0][1] * gh[1][0];
    if !(det > 0.0) {
        return None;
    }
    Some((gh, inv2(gh)?))
}

/// Normal part of `ĝ^{ij}(f_ij + Γ(f_i, f_j))` with the data needed by the
/// exact principal part: `(H⃗, g, ĝ⁻¹, f₁)`.
fn mean_curvature_local(metric: &MetricField, geom: &NodeGeom, j: &LocalJet) -> Option<(Vec3, Mat3, Mat2, [Vec3; 2])> {
    if geom.degenerate {
        return None;
    }
    let (f1, f2) = physical(geom, &j.d);
    let g = metric.eval(j.x);
    let (_, gi) = induced(&g, &f1)?;
    let gam = metric.christoffel(j.x);
    let mut v = [0.0; 3];
    for (idx, (a, b, w)) in [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)].into_iter().enumerate() {
        let c = w * gi[a][b];
        for m in 0..3 {
            let mut s = f2[idx][m];
            for k in 0..3 {
                for l in 0..3 {
                    s += gam[m][k][l] * f1[a][k] * f1[b][l];
                }
            }
            v[m] += c * s;
        }
    }
    let t = [inner(&g, v, f1[0]), inner(&g, v, f1[1])];
    for a in 0..2 {
        let c = gi[a][0] * t[0] + gi[a][1] * t[1];
        v = axpy(-c, f1[a], v);
    }
    Some((v, g, gi, f1))
}

/// `g`-normal component of `p` relative to the tangent plane `span(f₁)`.
fn normal_part(g: &Mat3, gi: &Mat2, f1: &[Vec3; 2], p: Vec3) -> Vec3 {
    let t = [inner(g, p, f1[0]), inner(g, p, f1[1])];
    let mut out = p;
    for a in 0..2 {
        let c = gi[a][0] * t[0] + gi[a][1] * t[1];
        out = axpy(-c, f1[a], out);
    }
    out
}

fn mean_curvature_scalar(metric: &MetricField, geom: &NodeGeom, j: &LocalJet, p: Vec3) -> Option<f64> {
    let (v, g, _, _) = mean_curvature_local(metric, geom, j)?;
    Some(inner(&g, v, p))
}

/// Outward unit conormal `n = (−f_y + (⟨f_x,f_y⟩/⟨f_x,f_x⟩) f_x)/‖·‖` on
/// `Γ₂`; at the corners the ratio is zero by the orthogonality of `γ`.
fn contact_physical(metric: &MetricField, x: Vec3, f1: &[Vec3; 2], p: Vec3, corner: bool) -> Option<f64> {
    let g = metric.eval(x);
    let xx = inner(&g, f1[0], f1[0]);
    if !(xx > 0.0) {
        return None;
    }
    let ratio = if corner { 0.0 } else { inner(&g, f1[0], f1[1]) / xx };
    let n = axpy(ratio, f1[0], scale(-1.0, f1[1]));
    let nn = inner(&g, n, n).sqrt();
    if !(nn > 0.0) {
        return None;
    }
    Some(inner(&g, n, p) / nn)
}

fn contact_local(metric: &MetricField, geom: &NodeGeom, j: &LocalJet, p: Vec3, corner: bool) -> Option<f64> {
    if geom.degenerate {
        return None;
    }
    let (f1, _) = physical(geom, &j.d);
    contact_physical(metric, j.x, &f1, p, corner)
}

/// Nodal embedding on a half-disk mesh.
#[derive(Debug, Clone)]
pub struct Embedding {
    mesh: Arc<HalfDiskMesh>,
    pub values: Vec<Vec3>,
}

impl Embedding {
    pub fn new(mesh: Arc<HalfDiskMesh>, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidArgument(format!("{} values for {} nodes", values.len(), mesh.len())));
        }
        Ok(Embedding { mesh, values })
    }

    pub fn from_fn(mesh: Arc<HalfDiskMesh>, f: impl Fn(Point) -> Vec3) -> Self {
        let values = mesh.grid.points.iter().map(|p| f(*p)).collect();
        Embedding { mesh, values }
    }

    /// The vertical half disk `(x, y) ↦ (x, 0, y)`.
    pub fn flat(mesh: Arc<HalfDiskMesh>) -> Self {
        Self::from_fn(mesh, |p| [p[0], 0.0, p[1]])
    }

    pub fn mesh(&self) -> &Arc<HalfDiskMesh> {
        &self.mesh
    }

    fn jet(&self, k: usize) -> LocalJet {
        LocalJet { x: self.values[k], d: self.mesh.geom[k].st.apply_vec(&self.values) }
    }

    /// `Γ₂` on `∂N₊` to `1e-12` and `det ĝ > 0` at interior nodes.
    pub fn validate(&self, metric: &MetricField) -> Result<()> {
        let m = &self.mesh;
        for k in 0..m.len() {
            if m.on_gamma2(k) && self.values[k][2].abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("Γ₂ node {k} off the boundary plane: z = {:e}", self.values[k][2])));
            }
            if m.grid.kinds[k] == NodeKind::Interior {
                let (f1, _) = physical(&m.geom[k], &self.jet(k).d);
                if induced(&metric.eval(self.values[k]), &f1).is_none() {
                    return Err(Error::Degenerate(format!("not immersed at node {k}")));
                }
            }
        }
        Ok(())
    }

    /// Largest nodal distance to another embedding on the same mesh.
    pub fn max_distance(&self, other: &Embedding) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Trapezoidal area `∫ √det⟨F_a, F_b⟩_g dξ dη` in logical coordinates.
    pub fn area(&self, metric: &MetricField) -> f64 {
        let m = &self.mesh;
        par_map(m.len(), |k| {
            let d = m.geom[k].st.apply_vec(&self.values);
            let g = metric.eval(self.values[k]);
            let (a, b, c) = (inner(&g, d[0], d[0]), inner(&g, d[0], d[1]), inner(&g, d[1], d[1]));
            m.area_weight(k) * (a * c - b * b).max(0.0).sqrt()
        })
        .into_iter()
        .sum()
    }

    /// Copy with the `Γ₁` values replaced by `γ`.
    pub fn with_boundary(&self, gamma: &BoundaryCurve) -> Embedding {
        let mut out = self.clone();
        for (k, v) in gamma.nodal(&self.mesh) {
            out.values[k] = v;
        }
        out
    }

    pub fn boundary_matches(&self, gamma: &BoundaryCurve, tol: f64) -> bool {
        gamma.nodal(&self.mesh).iter().all(|(k, v)| (0..3).all(|c| (self.values[*k][c] - v[c]).abs() <= tol))
    }
}

/// Unit transversal field along the surface, tangent to `∂N₊` on `Γ₂`.
#[derive(Debug, Clone)]
pub struct TransversalField {
    pub values: Vec<Vec3>,
}

impl TransversalField {
    /// `g`-unit normal of `f`, made tangent to `∂N₊` on `Γ₂`, smoothed by
    /// three Jacobi averaging passes and renormalized.
    pub fn from_embedding(f: &Embedding, metric: &MetricField) -> Result<Self> {
        let m = f.mesh();
        let grid = &m.grid;
        let raw: Vec<Option<Vec3>> = (0..m.len())
            .map(|k| {
                let d = m.geom[k].st.apply_vec(&f.values);
                let c = cross(d[0], d[1]);
                let gi = inv3(&metric.eval(f.values[k]))?;
                let v = mat_vec(&gi, c);
                let nv = metric.inner(f.values[k], v, v).sqrt();
                let scale_ref = dot(d[0], d[0]).sqrt() * dot(d[1], d[1]).sqrt();
                (nv > 1e-8 * scale_ref && !m.geom[k].degenerate).then(|| scale(1.0 / nv, v))
            })
            .collect();
        let mut p: Vec<Vec3> = Vec::with_capacity(m.len());
        for k in 0..m.len() {
            let v = match raw[k] {
                Some(v) => v,
                None => {
                    let (i, j) = grid.ij(k);
                    let mut acc = [0.0; 3];
                    for (di, dj) in [(-1i64, -1i64), (-1, 0), (0, -1), (1, -1), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a >= 0 && b >= 0 && a <= grid.nx as i64 && b <= grid.ny as i64 {
                            if let Some(w) = raw[grid.index(a as usize, b as usize)] {
                                acc = axpy(1.0, w, acc);
                            }
                        }
                    }
                    acc
                }
            };
            p.push(v);
        }
        let fix = |p: &mut Vec<Vec3>| -> Result<()> {
            for k in 0..m.len() {
                if m.on_gamma2(k) {
                    p[k][2] = 0.0;
                }
                let nv = metric.inner(f.values[k], p[k], p[k]).sqrt();
                if !(nv > 0.0) {
                    return Err(Error::Degenerate(format!("transversal field vanishes at node {k}")));
                }
                p[k] = scale(1.0 / nv, p[k]);
            }
            Ok(())
        };
        fix(&mut p)?;
        for _ in 0..3 {
            let next: Vec<Vec3> = (0..m.len())
                .map(|k| {
                    let (i, j) = grid.ij(k);
                    let mut acc = p[k];
                    let mut cnt = 1.0;
                    for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a >= 0 && b >= 0 && a <= grid.nx as i64 && b <= grid.ny as i64 {
                            acc = axpy(1.0, p[grid.index(a as usize, b as usize)], acc);
                            cnt += 1.0;
                        }
                    }
                    scale(1.0 / cnt, acc)
                })
                .collect();
            p = next;
            fix(&mut p)?;
        }
        Ok(TransversalField { values: p })
    }

    /// A constant field, normalized in `g` at each node of `f`.
    pub fn constant(f: &Embedding, metric: &MetricField, v: Vec3) -> Self {
        let values = f.values.iter().map(|x| scale(1.0 / metric.inner(*x, v, v).sqrt(), v)).collect();
        TransversalField { values }
    }

    /// Unit length, tangency to `∂N₊` on `Γ₂` and an angle of at least
    /// `10°` to the tangent plane at every non-degenerate node.
    pub fn validate(&self, f: &Embedding, metric: &MetricField) -> Result<()> {
        let m = f.mesh();
        let sin_min = (10.0f64).to_radians().sin();
        for k in 0..m.len() {
            let x = f.values[k];
            let p = self.values[k];
            let g = metric.eval(x);
            let nv = inner(&g, p, p).sqrt();
            if (nv - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("|p|_g = {nv} at node {k}")));
            }
            if m.on_gamma2(k) && p[2] != 0.0 {
                return Err(Error::InvalidArgument(format!("p not tangent to the boundary plane at node {k}")));
            }
            if m.geom[k].degenerate {
                continue;
            }
            let (f1, _) = physical(&m.geom[k], &f.jet(k).d);
            let (_, gi) = induced(&g, &f1).ok_or_else(|| Error::Degenerate(format!("not immersed at node {k}")))?;
            let q = normal_part(&g, &gi, &f1, p);
            if inner(&g, q, q).sqrt() < sin_min {
                return Err(Error::InvalidArgument(format!("p within 10° of the tangent plane at node {k}")));
            }
        }
        Ok(())
    }
}

/// Dirichlet curve on `Γ₁`, parametrized by the polar angle of `D₊`.
#[derive(Clone)]
pub struct BoundaryCurve {
    pub name: String,
    curve: CurveFn,
}

impl core::fmt::Debug for BoundaryCurve {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "BoundaryCurve({})", self.name)
    }
}

impl BoundaryCurve {
    pub fn new(name: &str, curve: impl Fn(f64) -> (Vec3, Vec3) + Send + Sync + 'static) -> Self {
        BoundaryCurve { name: name.into(), curve: Arc::new(curve) }
    }

    /// `c + R(cos θ, 0, sin θ)`; the center must lie on `∂N₊`.
    pub fn semicircle(radius: f64, center: Vec3) -> Self {
        Self::new("semicircle", move |t| {
            let (s, c) = t.sin_cos();
            let s = if t == PI { 0.0 } else { s };
            ([center[0] + radius * c, center[1], center[2] + radius * s], [-radius * s, 0.0, radius * c])
        })
    }

    /// Restriction of an embedding to `Γ₁`, interpolated linearly in `θ`.
    pub fn from_embedding(f: &Embedding) -> Self {
        let m = f.mesh();
        let mut pts: Vec<(f64, Vec3)> = m.gamma1.iter().filter_map(|&k| m.theta(k).map(|t| (t, f.values[k]))).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Self::new("restriction", move |t| {
            let i = pts.partition_point(|(s, _)| *s <= t).clamp(1, pts.len() - 1);
            let ((t0, a), (t1, b)) = (pts[i - 1], pts[i]);
            let w = (t - t0) / (t1 - t0);
            let d = scale(1.0 / (t1 - t0), axpy(-1.0, a, b));
            (axpy(w, axpy(-1.0, a, b), a), d)
        })
    }

    pub fn eval(&self, theta: f64) -> (Vec3, Vec3) {
        (self.curve)(theta)
    }

    /// Endpoints on `∂N₊` and `γ' ⟂_g ∂N₊` there.
    pub fn validate(&self, metric: &MetricField) -> Result<()> {
        for t in [0.0, PI] {
            let (x, d) = self.eval(t);
            if x[2].abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("curve endpoint at θ = {t} off the boundary plane")));
            }
            let g = metric.eval(x);
            let nd = inner(&g, d, d).sqrt();
            for e in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] {
                let c = inner(&g, d, e) / (nd * inner(&g, e, e).sqrt());
                if c.abs() > 1e-8 {
                    return Err(Error::InvalidArgument(format!("curve not orthogonal to the boundary plane at θ = {t}")));
                }
            }
        }
        Ok(())
    }

    /// Values at the `Γ₁` nodes.
    pub fn nodal(&self, mesh: &HalfDiskMesh) -> Vec<(usize, Vec3)> {
        mesh.gamma1.iter().filter_map(|&k| mesh.theta(k).map(|t| (k, self.eval(t).0))).collect()
    }

    /// `(1 − w) γ₀ + w γ₁` pointwise.
    pub fn blend(a: &BoundaryCurve, b: &BoundaryCurve, w: f64) -> Self {
        let (a, b) = (a.clone(), b.clone());
        Self::new("blend", move |t| {
            let ((xa, da), (xb, db)) = (a.eval(t), b.eval(t));
            (axpy(w, axpy(-1.0, xa, xb), xa), axpy(w, axpy(-1.0, da, db), da))
        })
    }
}

/// `H_f = ⟨H⃗, p⟩_g` at every node off `Γ₁`, where `H⃗` is the normal part of
/// `ĝ^{ij}(f_ij + f_i^k f_j^l Γ^m_{kl} ∂_m)`. `Γ₁` nodes carry prescribed
/// data and are reported as zero.
pub fn mean_curvature_residual(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<GridField> {
    let m = f.mesh();
    let vals = par_map(m.len(), |k| {
        if m.slot(k).is_none() {
            return Ok(0.0);
        }
        mean_curvature_scalar(metric, &m.geom[k], &f.jet(k), p.values[k])
            .ok_or_else(|| Error::Degenerate(format!("induced metric degenerate at node {k}")))
    });
    Ok(GridField::new("H", vals.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `Θ_f = ⟨n, p⟩_g` on `Γ₂` (zero at the corners and off `Γ₂`).
pub fn contact_angle_residual(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<GridField> {
    let m = f.mesh();
    let mut vals = vec![0.0; m.len()];
    for &k in &m.gamma2 {
        vals[k] = contact_local(metric, &m.geom[k], &f.jet(k), p.values[k], false)
            .ok_or_else(|| Error::Degenerate(format!("boundary frame degenerate at node {k}")))?;
    }
    Ok(GridField::new("Theta", vals))
}

/// Residual on the unknowns: `H` at interior nodes, `Θ` on `Γ₂`.
pub fn system_residual(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<Vec<f64>> {
    let m = f.mesh();
    par_map(m.unknowns.len(), |s| {
        let k = m.unknowns[s];
        let j = f.jet(k);
        let v = if m.on_gamma2(k) {
            contact_local(metric, &m.geom[k], &j, p.values[k], false)
        } else {
            mean_curvature_scalar(metric, &m.geom[k], &j, p.values[k])
        };
        v.ok_or_else(|| Error::Degenerate(format!("degenerate frame at node {k}")))
    })
    .into_iter()
    .collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Componentwise solution of `Δw − w = 0`, `w = γ − f₀` on `Γ₁` and
/// `∂_ν w + w = ((1−x)/2) ∂_τ(γ−f₀)(S₁) − ((1+x)/2) ∂_τ(γ−f₀)(S₂)` on `Γ₂`,
/// returning `f₀ + w`. The third component uses `w = 0` on `Γ₂` so the
/// result stays on `∂N₊`.
pub fn boundary_extension(gamma: &BoundaryCurve, f0: &Embedding) -> Result<Embedding> {
    let mesh = f0.mesh().clone();
    let mut grid = mesh.grid.clone();
    grid.domain = make_half_disk_with(EdgeField::zero(), EdgeField::Const(1.0));
    let bvp = MixedBVP::laplace().with_c(|_| -1.0);
    let robin = assemble(&bvp, &grid)?;
    let mut pinned = robin.clone();
    for &k in &mesh.gamma2 {
        pinned.matrix.clear_row(k);
        pinned.matrix.set(k, k, 1.0)?;
    }
    let diff: Vec<(f64, usize, Vec3)> = {
        let mut v: Vec<(f64, usize, Vec3)> = gamma
            .nodal(&mesh)
            .into_iter()
            .map(|(k, g)| (mesh.theta(k).unwrap_or(0.0), k, axpy(-1.0, f0.values[k], g)))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    };
    let n = diff.len();
    let end_slope = |a: usize, b: usize, c: usize| -> Vec3 {
        let (t0, t1, t2) = (diff[a].0, diff[b].0, diff[c].0);
        let w0 = (2.0 * t0 - t1 - t2) / ((t0 - t1) * (t0 - t2));
        let w1 = (t0 - t2) / ((t1 - t0) * (t1 - t2));
        let w2 = (t0 - t1) / ((t2 - t0) * (t2 - t1));
        let mut out = [0.0; 3];
        for c2 in 0..3 {
            out[c2] = w0 * diff[a].2[c2] + w1 * diff[b].2[c2] + w2 * diff[c].2[c2];
        }
        out
    };
    let slope_s2 = end_slope(0, 1, 2);
    let slope_s1 = end_slope(n - 1, n - 2, n - 3);
    let mut out = f0.values.clone();
    for comp in 0..3 {
        let sys = if comp == 2 { &pinned } else { &robin };
        let mut rhs = vec![0.0; mesh.len()];
        for (_, k, d) in &diff {
            rhs[*k] = d[comp];
        }
        if comp < 2 {
            for &k in &mesh.gamma2 {
                let x = mesh.grid.points[k][0];
                rhs[k] = 0.5 * (1.0 - x) * slope_s1[comp] - 0.5 * (1.0 + x) * slope_s2[comp];
            }
        }
        let w = solve(&LinearSystem { matrix: sys.matrix.clone(), rhs })?;
        for k in 0..mesh.len() {
            out[k][comp] += w.values[k];
        }
    }
    for &k in &mesh.gamma2 {
        out[k][2] = 0.0;
    }
    let mut e = Embedding::new(mesh, out)?;
    e = e.with_boundary(gamma);
    Ok(e)
}

/// Robin coefficients of the linearized contact angle at one node:
/// `DΘ(h) = −α h_y + β h_x + R h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinCoefficients {
    pub node: usize,
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
}

/// Linearization of `(H, Θ)` in directions `h p` with `h|_{Γ₁} = 0`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    /// Square operator on the unknowns (interior and `Γ₂` nodes).
    pub matrix: BandMatrix,
    pub unknowns: Vec<usize>,
    /// `DH` as weights over all nodes, for every non-degenerate node.
    pub dh_rows: Vec<Vec<(usize, f64)>>,
    /// `DΘ` as weights over all nodes on `Γ₂` including the corners.
    pub dtheta_rows: Vec<Vec<(usize, f64)>>,
    /// Coefficients on `Γ₂`, corners first and last.
    pub boundary: Vec<RobinCoefficients>,
    /// Largest relative gap between the finite-difference and the exact
    /// second-order coefficients before the splice.
    pub principal_mismatch: f64,
    /// `principal_mismatch > 1e-3`.
    pub flagged: bool,
}

impl LinearizedOperator {
    /// Applies the operator to a nodal field (values on `Γ₁` are ignored).
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = self.unknowns.iter().map(|&k| h[k]).collect();
        self.matrix.matvec(&x)
    }
}

/// Central difference with one Richardson level.
fn richardson(f: impl Fn(f64) -> Option<f64>, t: f64) -> Option<f64> {
    let d = |s: f64| Some((f(s)? - f(-s)?) / (2.0 * s));
    let (a, b) = (d(t)?, d(0.5 * t)?);
    Some((4.0 * b - a) / 3.0)
}

/// Covector gradients of a local functional with respect to the node value
/// (slot 0) and the five logical derivatives (slots 1..=5).
fn local_gradients(j: &LocalJet, slots: &[usize], f: impl Fn(&LocalJet) -> Option<f64>) -> Option<[Vec3; 6]> {
    let mut out = [[0.0; 3]; 6];
    for &s in slots {
        for c in 0..3 {
            let v = richardson(
                |t| {
                    let mut jj = *j;
                    if s == 0 {
                        jj.x[c] += t;
                    } else {
                        jj.d[s - 1][c] += t;
                    }
                    f(&jj)
                },
                LIN_FD_STEP,
            )?;
            out[s][c] = v;
        }
    }
    Some(out)
}

/// Spreads local covector gradients over the node stencil in direction `p`.
fn spread(k: usize, geom: &NodeGeom, grads: &[Vec3; 6], p: &[Vec3]) -> Vec<(usize, f64)> {
    let mut row = vec![(k, dot(grads[0], p[k]))];
    for (d, w) in geom.st.d.iter().enumerate() {
        for (c, a) in w {
            row.push((*c, a * dot(grads[d + 1], p[*c])));
        }
    }
    row.sort_by_key(|e| e.0);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match merged.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => merged.push((c, v)),
        }
    }
    merged
}

struct HRow {
    row: Vec<(usize, f64)>,
    mismatch: f64,
}

/// `DH` row at node `k` with the exact principal part spliced in.
fn dh_row(f: &Embedding, metric: &MetricField, p: &TransversalField, k: usize) -> Result<HRow> {
    let m = f.mesh();
    let geom = &m.geom[k];
    let j = f.jet(k);
    let pk = p.values[k];
    let fail = || Error::Degenerate(format!("cannot linearize H at node {k}"));
    let mut grads = local_gradients(&j, &[0, 1, 2, 3, 4, 5], |jj| mean_curvature_scalar(metric, geom, jj, pk)).ok_or_else(fail)?;
    let (_, g, gi, f1) = mean_curvature_local(metric, geom, &j).ok_or_else(fail)?;
    let q = mat_vec(&g, normal_part(&g, &gi, &f1, pk));
    let kv = geom.kinv;
    let mm = |a: usize, b: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for l in 0..2 {
                s += gi[i][l] * kv[a][i] * kv[b][l];
            }
        }
        s
    };
    let coef = [mm(0, 0), 2.0 * mm(0, 1), mm(1, 1)];
    let mut scale_ref: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for (idx, c) in coef.iter().enumerate() {
        let exact = scale(*c, q);
        for comp in 0..3 {
            gap = gap.max((grads[3 + idx][comp] - exact[comp]).abs());
            scale_ref = scale_ref.max(exact[comp].abs());
        }
        grads[3 + idx] = exact;
    }
    let mismatch = if scale_ref > 0.0 { gap / scale_ref } else { gap };
    Ok(HRow { row: spread(k, geom, &grads, &p.values), mismatch })
}

fn dtheta_row(f: &Embedding, metric: &MetricField, p: &TransversalField, k: usize) -> Result<Vec<(usize, f64)>> {
    let m = f.mesh();
    let geom = &m.geom[k];
    let corner = m.is_corner(k);
    let pk = p.values[k];
    let grads = local_gradients(&f.jet(k), &[0, 1, 2], |jj| contact_local(metric, geom, jj, pk, corner))
        .ok_or_else(|| Error::Degenerate(format!("cannot linearize Θ at node {k}")))?;
    Ok(spread(k, geom, &grads, &p.values))
}

/// `α, β, R` from the contact functional in physical derivatives:
/// `D(hp)_x = h_x p + h p_x`, so `β = ∂Θ/∂f_x·p`, `α = −∂Θ/∂f_y·p` and
/// `R = ∂Θ/∂f·p + ∂Θ/∂f_x·p_x + ∂Θ/∂f_y·p_y`.
fn robin_coefficients(f: &Embedding, metric: &MetricField, p: &TransversalField, k: usize) -> Result<RobinCoefficients> {
    let m = f.mesh();
    let geom = &m.geom[k];
    let corner = m.is_corner(k);
    let j = f.jet(k);
    let (f1, _) = physical(geom, &j.d);
    let (p1, _) = physical(geom, &geom.st.apply_vec(&p.values));
    let pk = p.values[k];
    let fail = || Error::Degenerate(format!("cannot linearize Θ at node {k}"));
    let along = |dir: [Vec3; 3]| {
        richardson(
            |t| {
                let x = axpy(t, dir[0], j.x);
                let g1 = [axpy(t, dir[1], f1[0]), axpy(t, dir[2], f1[1])];
                contact_physical(metric, x, &g1, pk, corner)
            },
            LIN_FD_STEP,
        )
        .ok_or_else(fail)
    };
    let z = [0.0; 3];
    let beta = along([z, pk, z])?;
    let alpha = -along([z, z, pk])?;
    let r = along([pk, p1[0], p1[1]])?;
    Ok(RobinCoefficients { node: k, alpha, beta, r })
}

fn bandwidth(mesh: &HalfDiskMesh) -> usize {
    3 * (mesh.grid.nx + 1) + 3
}

fn reduced_matrix(mesh: &HalfDiskMesh, rows: &[(usize, Vec<(usize, f64)>)]) -> Result<BandMatrix> {
    let n = mesh.unknowns.len();
    let bw = bandwidth(mesh);
    let mut a = BandMatrix::new(n, bw, bw);
    for (k, row) in rows {
        let r = mesh.slot(*k).ok_or_else(|| Error::InvalidArgument(format!("node {k} is not an unknown")))?;
        for (c, v) in row {
            if let Some(s) = mesh.slot(*c) {
                a.add(r, s, *v)?;
            }
        }
    }
    Ok(a)
}

type SparseRows = Vec<(usize, Vec<(usize, f64)>)>;

fn unknown_rows(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<(SparseRows, f64)> {
    let m = f.mesh();
    let rows = par_map(m.unknowns.len(), |s| {
        let k = m.unknowns[s];
        if m.on_gamma2(k) {
            dtheta_row(f, metric, p, k).map(|r| (k, r, 0.0))
        } else {
            dh_row(f, metric, p, k).map(|r| (k, r.row, r.mismatch))
        }
    });
    let mut out = Vec::with_capacity(rows.len());
    let mut mismatch: f64 = 0.0;
    for r in rows {
        let (k, row, mm) = r?;
        mismatch = mismatch.max(mm);
        out.push((k, row));
    }
    Ok((out, mismatch))
}

/// Linearization of `(H, Θ)` at `f` along `h p`: interior rows carry the
/// exact principal part `⟨p^⊥, p⟩ ĝ^{ij} h_ij` plus the finite-difference
/// first-order part, `Γ₂` rows the finite-difference `DΘ`.
pub fn linearized_operator(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<LinearizedOperator> {
    let m = f.mesh();
    let (rows, _) = unknown_rows(f, metric, p)?;
    let matrix = reduced_matrix(m, &rows)?;
    let hr = par_map(m.len(), |k| if m.geom[k].degenerate { Ok(None) } else { dh_row(f, metric, p, k).map(Some) });
    let mut dh_rows = Vec::with_capacity(m.len());
    let mut mismatch: f64 = 0.0;
    for r in hr {
        match r? {
            Some(r) => {
                mismatch = mismatch.max(r.mismatch);
                dh_rows.push(r.row);
            }
            None => dh_rows.push(Vec::new()),
        }
    }
    let mut dtheta_rows = vec![Vec::new(); m.len()];
    let mut boundary = Vec::new();
    let g = &m.grid;
    for i in 0..=g.nx {
        let k = g.index(i, 0);
        dtheta_rows[k] = dtheta_row(f, metric, p, k)?;
        boundary.push(robin_coefficients(f, metric, p, k)?);
    }
    Ok(LinearizedOperator { matrix, unknowns: m.unknowns.clone(), dh_rows, dtheta_rows, boundary, principal_mismatch: mismatch, flagged: mismatch > 1e-3 })
}

/// Number of singular values of a square operator below `tol · σ_max`,
/// among the smallest `probe`.
pub fn kernel_dim_of(a: &BandMatrix, tol: f64, probe: usize) -> usize {
    let (small, max) = singular_summary(a, probe);
    small.iter().filter(|s| **s <= tol * max).count()
}

/// Estimated dimension of the Jacobi kernel at `f`.
pub fn jacobi_kernel_dim(f: &Embedding, metric: &MetricField, p: &TransversalField, tol: f64) -> Result<usize> {
    let (rows, _) = unknown_rows(f, metric, p)?;
    Ok(kernel_dim_of(&reduced_matrix(f.mesh(), &rows)?, tol, 4))
}

/// `(σ_min, σ_max)` of the linearized operator.
pub fn singular_extremes(f: &Embedding, metric: &MetricField, p: &TransversalField) -> Result<(f64, f64)> {
    let (rows, _) = unknown_rows(f, metric, p)?;
    let (small, max) = singular_summary(&reduced_matrix(f.mesh(), &rows)?, 1);
    Ok((small.first().copied().unwrap_or(0.0), max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative singular value below which the linearization counts as singular.
    pub sigma_tol: f64,
    /// Check the singular values before the first update.
    pub check_singular: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-9, max_iter: 25, sigma_tol: 1e-10, check_singular: true }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub embedding: Embedding,
    /// `max(‖H‖∞, ‖Θ‖∞)` before each update and at the end.
    pub history: Vec<f64>,
    /// Number of updates.
    pub iterations: usize,
}

pub fn newton_solve(gamma: &BoundaryCurve, metric: &MetricField, p: &TransversalField, f_init: &Embedding) -> Result<NewtonOutcome> {
    newton_solve_with(gamma, metric, p, f_init, NewtonOptions::default())
}

/// Newton iteration `f ← f + h p` with `h|_{Γ₁} = 0`, started from
/// `f_init` (replaced by its boundary extension when `f_init|_{Γ₁} ≠ γ`).
pub fn newton_solve_with(
    gamma: &BoundaryCurve,
    metric: &MetricField,
    p: &TransversalField,
    f_init: &Embedding,
    opts: NewtonOptions,
) -> Result<NewtonOutcome> {
    let mut f = if f_init.boundary_matches(gamma, 0.0) { f_init.clone() } else { boundary_extension(gamma, f_init)? };
    let m = f.mesh().clone();
    let mut history = Vec::new();
    for it in 0..=opts.max_iter {
        let r = system_residual(&f, metric, p)?;
        let rn = max_norm(&r);
        history.push(rn);
        if rn <= opts.tol {
            return Ok(NewtonOutcome { embedding: f, history, iterations: it });
        }
        if it == opts.max_iter || !rn.is_finite() || rn > 1e4 * history[0].max(1.0) {
            return Err(Error::Divergence { iterations: it, residual: rn });
        }
        let (rows, _) = unknown_rows(&f, metric, p)?;
        let a = reduced_matrix(&m, &rows)?;
        if it == 0 && opts.check_singular {
            let dim = kernel_dim_of(&a, opts.sigma_tol, 3);
            if dim > 0 {
                return Err(Error::JacobiKernel(dim));
            }
        }
        let lu = match a.clone().factor() {
            Ok(lu) => lu,
            Err(_) => return Err(Error::JacobiKernel(kernel_dim_of(&a, opts.sigma_tol, 3).max(1))),
        };
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let h = lu.solve(&rhs);
        for (s, &k) in m.unknowns.iter().enumerate() {
            f.values[k] = axpy(h[s], p.values[k], f.values[k]);
        }
    }
    unreachable!()
}

/// `(lhs, rhs)` of the first variation of area along `X`: the centered
/// difference (step `1e-4`, one Richardson level) of the discrete area of
/// `f + tX`, and `−∫⟨H⃗, X⟩ + ∫_{Γ₁}⟨n, X⟩ + ∫_{Γ₂}⟨n, X⟩` by quadrature.
pub fn first_variation_check(f: &Embedding, metric: &MetricField, x: &[Vec3]) -> Result<(f64, f64)> {
    let m = f.mesh();
    if x.len() != m.len() {
        return Err(Error::InvalidArgument("variation field has the wrong length".into()));
    }
    for k in 0..m.len() {
        if m.on_gamma2(k) && x[k][2].abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("variation not tangent to the boundary plane at node {k}")));
        }
    }
    let shifted = |t: f64| {
        let mut g = f.clone();
        for (v, d) in g.values.iter_mut().zip(x) {
            *v = axpy(t, *d, *v);
        }
        g.area(metric)
    };
    let lhs = richardson(|t| Some(shifted(t)), 1e-4).unwrap_or(f64::NAN);
    let interior: f64 = par_map(m.len(), |k| {
        let j = f.jet(k);
        let g = metric.eval(j.x);
        let (a, b, c) = (inner(&g, j.d[0], j.d[0]), inner(&g, j.d[0], j.d[1]), inner(&g, j.d[1], j.d[1]));
        let da = (a * c - b * b).max(0.0).sqrt();
        match mean_curvature_local(metric, &m.geom[k], &j) {
            Some((hv, g, _, _)) => m.area_weight(k) * da * inner(&g, hv, x[k]),
            None => 0.0,
        }
    })
    .into_iter()
    .sum();
    let mut rhs = -interior;
    for side in m.sides() {
        let vals = side
            .nodes
            .iter()
            .map(|&k| {
                if m.geom[k].degenerate {
                    return None;
                }
                let j = f.jet(k);
                let g = metric.eval(j.x);
                let (ts, to) = (j.d[side.along], scale(side.sign, j.d[side.out]));
                let ss = inner(&g, ts, ts);
                let nrm = axpy(-inner(&g, to, ts) / ss, ts, to);
                let nn = inner(&g, nrm, nrm).sqrt();
                (nn > 0.0).then(|| inner(&g, nrm, x[k]) / nn * ss.sqrt())
            })
            .collect();
        rhs += m.side_integral(&side, vals);
    }
    Ok((lhs, rhs))
}

/// `|B(h₁, h₂) − B(h₂, h₁)|` for
/// `B(h₁, h₂) = −∫ h₁ DH(h₂) dA + ∫_{Γ₁} h₁(α₁ ∂_ν h₂ + β₁ ∂_τ h₂) ds + ∫_{Γ₂} h₁ DΘ(h₂) ds`,
/// with `α₁, β₁` from `Df(α₁ν₁ + β₁τ₁) = n` on `Γ₁`.
pub fn greens_symmetry_check(f: &Embedding, metric: &MetricField, p: &TransversalField, h1: &[f64], h2: &[f64]) -> Result<f64> {
    let m = f.mesh();
    if h1.len() != m.len() || h2.len() != m.len() {
        return Err(Error::InvalidArgument("scalar fields have the wrong length".into()));
    }
    let op = linearized_operator(f, metric, p)?;
    let b = |u: &[f64], v: &[f64]| -> f64 {
        let mut total = 0.0;
        for k in 0..m.len() {
            if op.dh_rows[k].is_empty() {
                continue;
            }
            let j = f.jet(k);
            let g = metric.eval(j.x);
            let (a, b2, c) = (inner(&g, j.d[0], j.d[0]), inner(&g, j.d[0], j.d[1]), inner(&g, j.d[1], j.d[1]));
            let dh: f64 = op.dh_rows[k].iter().map(|(c2, w)| w * v[*c2]).sum();
            total -= m.area_weight(k) * (a * c - b2 * b2).max(0.0).sqrt() * u[k] * dh;
        }
        for side in m.sides() {
            let vals = side
                .nodes
                .iter()
                .map(|&k| {
                    if m.geom[k].degenerate {
                        return None;
                    }
                    let j = f.jet(k);
                    let g = metric.eval(j.x);
                    let ts = j.d[side.along];
                    let ds = inner(&g, ts, ts).sqrt();
                    if side.gamma2 {
                        let dth: f64 = op.dtheta_rows[k].iter().map(|(c2, w)| w * v[*c2]).sum();
                        return Some(u[k] * dth * ds);
                    }
                    let pt = m.grid.points[k];
                    let (nu, tau) = ([pt[0], pt[1]], [-pt[1], pt[0]]);
                    let (f1, _) = physical(&m.geom[k], &j.d);
                    let fnu = axpy(nu[1], f1[1], scale(nu[0], f1[0]));
                    let ftau = axpy(tau[1], f1[1], scale(tau[0], f1[0]));
                    let tt = inner(&g, ftau, ftau);
                    let w = axpy(-inner(&g, fnu, ftau) / tt, ftau, fnu);
                    let wn = inner(&g, w, w).sqrt();
                    let alpha = 1.0 / wn;
                    let beta = -inner(&g, fnu, ftau) / (tt * wn);
                    let dv = m.geom[k].st.apply(v);
                    let kv = m.geom[k].kinv;
                    let grad = [dv[0] * kv[0][0] + dv[1] * kv[1][0], dv[0] * kv[0][1] + dv[1] * kv[1][1]];
                    let dnu = grad[0] * nu[0] + grad[1] * nu[1];
                    let dtau = grad[0] * tau[0] + grad[1] * tau[1];
                    Some(u[k] * (alpha * dnu + beta * dtau) * ds)
                })
                .collect();
            total += m.side_integral(&side, vals);
        }
        total
    };
    Ok((b(h1, h2) - b(h2, h1)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(n: usize) -> (Embedding, MetricField, TransversalField) {
        let f = Embedding::flat(HalfDiskMesh::new(n).unwrap());
        let g = MetricField::euclidean();
        let p = TransversalField::from_embedding(&f, &g).unwrap();
        (f, g, p)
    }

    /// Flat disk plus a normal bump vanishing on `Γ₁` and flat across `Γ₂`.
    fn bumped(n: usize, eps: f64) -> Embedding {
        Embedding::from_fn(HalfDiskMesh::new(n).unwrap(), move |q| {
            let b = 1.0 - q[0] * q[0] - q[1] * q[1];
            [q[0], eps * b * (1.0 + 0.5 * q[0]), q[1]]
        })
    }

    /// Grid Laplacian of the second component of `f`, divided out of `ε`.
    fn discrete_laplacian(f: &Embedding, k: usize) -> f64 {
        let m = f.mesh();
        let (_, f2) = physical(&m.geom[k], &m.geom[k].st.apply_vec(&f.values));
        (f2[0][1] + f2[2][1]) / 1e-3
    }

    #[test]
    fn christoffel_symmetric_and_matches_differences() {
        let analytic = MetricField::bump(0.3, [0.1, 0.2, 0.3], 0.9);
        let a2 = analytic.clone();
        let sampled = MetricField::from_fn("sampled", move |x| a2.eval(x));
        for x in [[0.0, 0.1, 0.2], [0.3, -0.2, 0.5], [-0.4, 0.3, 0.05]] {
            let (ga, gs) = (analytic.christoffel(x), sampled.christoffel(x));
            for m in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert!((ga[m][k][l] - ga[m][l][k]).abs() <= 1e-10);
                        assert!((ga[m][k][l] - gs[m][k][l]).abs() <= 1e-7, "{m}{k}{l}");
                    }
                }
            }
        }
        assert!(analytic.validate(&[[0.0, 0.0, 0.0], [0.1, 0.2, 0.3]]).is_ok());
        let bad = MetricField::from_fn("bad", |_| [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(bad.validate(&[[0.0; 3]]).is_err());
    }

    #[test]
    fn flat_disk_is_exact() {
        for n in [8, 16, 24] {
            let (f, g, p) = flat(n);
            f.validate(&g).unwrap();
            p.validate(&f, &g).unwrap();
            assert!(mean_curvature_residual(&f, &g, &p).unwrap().max_abs() <= 1e-12);
            assert!(contact_angle_residual(&f, &g, &p).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn paraboloid_graph_matches_laplacian() {
        let eps = 1e-3;
        let mesh = HalfDiskMesh::new(16).unwrap();
        let f = Embedding::from_fn(mesh, move |q| [q[0], eps * (1.0 - q[0] * q[0] - q[1] * q[1]), q[1]]);
        let g = MetricField::euclidean();
        let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
        let h = mean_curvature_residual(&f, &g, &p).unwrap();
        let m = f.mesh();
        for k in m.unknowns.iter().copied().filter(|k| m.grid.kinds[*k] == NodeKind::Interior) {
            assert!((h.values[k] - eps * discrete_laplacian(&f, k)).abs() <= 10.0 * eps * eps, "{}", h.values[k]);
        }
    }

    #[test]
    fn scaling_rescales_mean_curvature() {
        let f = bumped(16, 0.2);
        let g = MetricField::euclidean();
        let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
        let mut f3 = f.clone();
        f3.values.iter_mut().for_each(|v| *v = scale(3.0, *v));
        let (h, h3) = (mean_curvature_residual(&f, &g, &p).unwrap(), mean_curvature_residual(&f3, &g, &p).unwrap());
        for (a, b) in h.values.iter().zip(&h3.values) {
            assert!((a / 3.0 - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn tilted_disk_contact_angle() {
        let th: f64 = 0.3;
        let mesh = HalfDiskMesh::new(12).unwrap();
        let f = Embedding::from_fn(mesh, move |q| [q[0], -q[1] * th.sin(), q[1] * th.cos()]);
        let g = MetricField::euclidean();
        let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
        let t = contact_angle_residual(&f, &g, &p).unwrap();
        for &k in &f.mesh().gamma2 {
            assert!((t.values[k] - th.sin()).abs() <= 1e-10);
        }
        for k in [f.mesh().grid.index(0, 0), f.mesh().grid.index(12, 0)] {
            assert_eq!(t.values[k], 0.0);
        }
    }

    #[test]
    fn transversal_field_invariants() {
        let f = bumped(16, 0.1);
        let g = MetricField::bump(0.2, [0.0, 0.2, 0.3], 0.8);
        let p = TransversalField::from_embedding(&f, &g).unwrap();
        p.validate(&f, &g).unwrap();
        let tangent = TransversalField::constant(&f, &g, [1.0, 0.0, 0.0]);
        assert!(tangent.validate(&f, &g).is_err());
    }

    #[test]
    fn boundary_curve_checks() {
        let g = MetricField::euclidean();
        BoundaryCurve::semicircle(1.0, [0.0, 0.2, 0.0]).validate(&g).unwrap();
        let tilted = BoundaryCurve::new("tilted", |t| {
            let (s, c) = t.sin_cos();
            ([c, 0.3 * s, s], [-s, 0.3 * c, c])
        });
        assert!(tilted.validate(&g).is_err());
    }

    #[test]
    fn boundary_extension_identity_linearity_and_bound() {
        let f0 = bumped(16, 0.1);
        let same = BoundaryCurve::from_embedding(&f0);
        let phi = boundary_extension(&same, &f0).unwrap();
        assert!(phi.max_distance(&f0) <= 1e-12);

        let pert = |a: f64| {
            BoundaryCurve::new("pert", move |t| {
                let (s, c) = t.sin_cos();
                let w = a * s * s;
                ([c, w, s], [-s, 2.0 * a * s * c, c])
            })
        };
        let mesh = f0.mesh().clone();
        let flat = Embedding::flat(mesh.clone());
        let (p1, p2, p3) = (
            boundary_extension(&pert(0.01), &flat).unwrap(),
            boundary_extension(&pert(0.02), &flat).unwrap(),
            boundary_extension(&pert(0.03), &flat).unwrap(),
        );
        for k in 0..mesh.len() {
            for c in 0..3 {
                let lin = p1.values[k][c] + p2.values[k][c] - p3.values[k][c] - flat.values[k][c];
                assert!(lin.abs() <= 1e-10);
            }
        }
        assert!(p1.boundary_matches(&pert(0.01), 0.0));
        p1.validate(&MetricField::euclidean()).unwrap();
        let c = p2.max_distance(&flat) / 0.02;
        assert!(c.is_finite() && c <= 2.0, "{c}");
    }

    #[test]
    fn flat_linearization_is_laplacian_with_normal_derivative() {
        let (f, g, p) = flat(12);
        let op = linearized_operator(&f, &g, &p).unwrap();
        assert!(!op.flagged);
        assert!(op.principal_mismatch <= 1e-6, "{}", op.principal_mismatch);
        for c in &op.boundary {
            assert!((c.alpha - 1.0).abs() <= 1e-7 && c.beta.abs() <= 1e-7 && c.r.abs() <= 1e-7, "{c:?}");
        }
        let m = f.mesh();
        let h: Vec<f64> = m.grid.points.iter().map(|q| q[0] * q[0] * q[1] + q[1] * q[1]).collect();
        let hv: Vec<Vec3> = h.iter().map(|v| [0.0, *v, 0.0]).collect();
        for k in 0..m.len() {
            if op.dh_rows[k].is_empty() {
                continue;
            }
            let (_, f2) = physical(&m.geom[k], &m.geom[k].st.apply_vec(&hv));
            let lap = f2[0][1] + f2[2][1];
            let v: f64 = op.dh_rows[k].iter().map(|(c, w)| w * h[*c]).sum();
            assert!((v - lap).abs() <= 1e-6 * (1.0 + lap.abs()), "{v} {lap}");
        }
    }

    #[test]
    fn beta_vanishes_at_corners() {
        let f = bumped(16, 0.1);
        let g = MetricField::bump(0.2, [0.2, 0.1, 0.3], 0.8);
        let p = TransversalField::from_embedding(&f, &g).unwrap();
        let op = linearized_operator(&f, &g, &p).unwrap();
        let (first, last) = (op.boundary[0], op.boundary[op.boundary.len() - 1]);
        assert!(first.beta.abs() <= 1e-8 && last.beta.abs() <= 1e-8);
        assert!(op.boundary.iter().all(|c| c.alpha > 0.0));
        assert!(op.principal_mismatch <= 1e-6, "{}", op.principal_mismatch);
    }

    #[test]
    fn operator_matches_residual_differences() {
        let f = bumped(12, 0.1);
        let g = MetricField::bump(0.2, [0.2, 0.1, 0.3], 0.8);
        let p = TransversalField::from_embedding(&f, &g).unwrap();
        let op = linearized_operator(&f, &g, &p).unwrap();
        let m = f.mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let c: [f64; 4] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let h: Vec<f64> = m
                .grid
                .points
                .iter()
                .map(|q| (1.0 - q[0] * q[0] - q[1] * q[1]) * (c[0] + c[1] * q[0] + c[2] * q[1] + c[3] * q[0] * q[1]))
                .collect();
            let moved = |t: f64| {
                let mut e = f.clone();
                for &k in &m.unknowns {
                    e.values[k] = axpy(t * h[k], p.values[k], e.values[k]);
                }
                system_residual(&e, &g, &p).unwrap()
            };
            let s = 1e-5;
            let (rp, rm) = (moved(s), moved(-s));
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * s)).collect();
            let jh = op.apply(&h);
            let err = max_norm(&fd.iter().zip(&jh).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(err <= 1e-4 * max_norm(&fd), "{err} {}", max_norm(&fd));
        }
    }

    #[test]
    fn kernel_dimension() {
        let (f, g, p) = flat(12);
        assert_eq!(jacobi_kernel_dim(&f, &g, &p, 1e-8).unwrap(), 0);
        let op = linearized_operator(&f, &g, &p).unwrap();
        let mut a = op.matrix.clone();
        a.clear_row(5);
        assert!(kernel_dim_of(&a, 1e-8, 3) >= 1);
    }

    #[test]
    fn newton_flat_and_bumped() {
        let (f, g, p) = flat(12);
        let gamma = BoundaryCurve::semicircle(1.0, [0.0; 3]);
        let out = newton_solve(&gamma, &g, &p, &f).unwrap();
        assert!(out.iterations <= 1);

        let start = bumped(12, 0.05);
        let out = newton_solve(&gamma, &g, &p, &start).unwrap();
        assert!(*out.history.last().unwrap() <= 1e-9);
        assert!(out.embedding.max_distance(&f) <= 1e-8, "{}", out.embedding.max_distance(&f));
        let h = &out.history;
        for w in h.windows(2).filter(|w| w[1] > 1e-13) {
            assert!(w[1] / (w[0] * w[0]) <= 50.0, "{h:?}");
        }
    }

    #[test]
    fn newton_perturbed_metric() {
        let (f, _, p) = flat(12);
        let g = MetricField::bump(0.05, [0.1, 0.3, 0.4], 0.8);
        let gamma = BoundaryCurve::semicircle(1.0, [0.0; 3]);
        let p = TransversalField { values: p.values.iter().zip(&f.values).map(|(v, x)| scale(1.0 / g.inner(*x, *v, *v).sqrt(), *v)).collect() };
        let out = newton_solve(&gamma, &g, &p, &f).unwrap();
        let d = out.embedding.max_distance(&f);
        assert!(d > 1e-4 && d < 0.1, "{d}");
        out.embedding.validate(&g).unwrap();
        for (k, v) in gamma.nodal(f.mesh()) {
            assert_eq!(out.embedding.values[k], v);
        }
    }

    #[test]
    fn first_variation_trivial_cases() {
        let (f, g, _) = flat(16);
        let x = vec![[1.0, 0.0, 0.0]; f.mesh().len()];
        let (l, r) = first_variation_check(&f, &g, &x).unwrap();
        assert!(l.abs() <= 1e-8 && r.abs() <= 1e-6, "{l} {r}");
        let bad = vec![[0.0, 0.0, 1.0]; f.mesh().len()];
        assert!(first_variation_check(&f, &g, &bad).is_err());
    }

    #[test]
    fn greens_trivial_cases() {
        let (f, g, p) = flat(12);
        let h: Vec<f64> = f.mesh().grid.points.iter().map(|q| q[0] + q[1] * q[1]).collect();
        assert_eq!(greens_symmetry_check(&f, &g, &p, &h, &h).unwrap(), 0.0);
        let z = vec![0.0; h.len()];
        assert_eq!(greens_symmetry_check(&f, &g, &p, &h, &z).unwrap(), 0.0);
    }

    #[test]
    fn first_variation_converges() {
        let g = MetricField::bump(0.2, [0.2, 0.1, 0.3], 0.8);
        let rel: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let mesh = HalfDiskMesh::new(n).unwrap();
                let f = Embedding::from_fn(mesh.clone(), |q| {
                    let b = 1.0 - q[0] * q[0] - q[1] * q[1];
                    [q[0] + 0.1 * q[1] * q[1], 0.1 * b * (1.0 + 0.5 * q[0]) + 0.05 * q[1], q[1] * (1.0 + 0.1 * q[0])]
                });
                let x: Vec<Vec3> = mesh.grid.points.iter().map(|q| [0.3 + q[0] * q[1], 0.5 * q[0] + q[1] * q[1], q[1] * (1.0 + q[0])]).collect();
                let (l, r) = first_variation_check(&f, &g, &x).unwrap();
                ((l - r) / l).abs()
            })
            .collect();
        assert!(rel[1] <= 1e-3 && rel[1] < 0.5 * rel[0], "{rel:?}");
    }

    #[test]
    fn greens_defect_shrinks() {
        let d: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let (f, g, p) = flat(n);
                let pts = &f.mesh().grid.points;
                let h1: Vec<f64> = pts.iter().map(|q| (1.3 * q[0] + 0.4).sin() * (2.0 * q[1]).cos() + q[0] * q[1]).collect();
                let h2: Vec<f64> = pts.iter().map(|q| q[0] * q[0] - 0.7 * q[1] + (3.0 * q[0] * q[1]).sin()).collect();
                greens_symmetry_check(&f, &g, &p, &h1, &h2).unwrap() * n as f64
            })
            .collect();
        assert!(d[1] <= 1.25 * d[0], "{d:?}");
    }
}
