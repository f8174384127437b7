//! Finite differences for mixed Dirichlet/Robin problems on structured
//! curvilinear grids.
//!
//! A grid is the image of the logical square `[0,1]²` under a smooth map.
//! Derivatives are taken in logical coordinates (centered inside, one-sided
//! second order on the sides) and converted by the chain rule, so the
//! operator `J u = a_ij D_ij u + b_i D_i u + c u` is applied in
//! non-divergence form. Robin rows discretize
//! `∂_ν u + β ∂_τ u + d u = g`; Dirichlet rows are identity rows.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::corner_analysis::{eval_singular, eval_singular_jet, local_polar, SingularTerm};
use crate::domain::{BcKind, DomainSpec, Point, GAMMA1, GAMMA2, SECTOR_ARC, SECTOR_LEFT, SECTOR_RIGHT};
use crate::jet::Jet2;
use crate::linalg::BandMatrix;
use crate::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];
/// Second logical derivatives `[ξξ, ξη, ηη]` of both physical coordinates.
pub type Hess2 = [[f64; 3]; 2];
/// `(ξ, η) ↦ (point, ∂(x,y)/∂(ξ,η), second derivatives)`.
pub type GridMap = Arc<dyn Fn(f64, f64) -> (Point, Mat2, Hess2) + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// Boundary data as a function of the point and the edge parameter.
pub type EdgeDataFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Interior,
    Edge { edge: usize, t: f64 },
    Corner { corner: usize },
    /// Degenerate node where the map collapses onto a corner (sector vertex).
    Vertex { corner: usize },
}

/// Structured grid with `(nx + 1) × (ny + 1)` nodes, node `(i, j)` at
/// index `j·(nx + 1) + i` and logical position `(i/nx, j/ny)`.
#[derive(Clone)]
pub struct CurvGrid {
    pub nx: usize,
    pub ny: usize,
    pub domain: DomainSpec,
    pub map: GridMap,
    pub points: Vec<Point>,
    pub jac: Vec<Mat2>,
    pub hess: Vec<Hess2>,
    pub kinds: Vec<NodeKind>,
}

impl core::fmt::Debug for CurvGrid {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CurvGrid({} {}x{})", self.domain.name, self.nx, self.ny)
    }
}

/// Nodal values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub values: Vec<f64>,
    pub name: String,
    pub units: String,
}

impl GridField {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self { values, name: name.into(), units: String::new() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn inv2(m: Mat2) -> Mat2 {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn det2(m: Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// First-derivative weights along one logical axis at position `i` of `0..=n`.
fn d1(i: usize, n: usize, h: f64) -> Vec<(isize, f64)> {
    if i > 0 && i < n {
        vec![(-1, -0.5 / h), (1, 0.5 / h)]
    } else if i == 0 {
        vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
    } else {
        vec![(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)]
    }
}

fn d2(i: usize, n: usize, h: f64) -> Vec<(isize, f64)> {
    let h2 = h * h;
    if i > 0 && i < n {
        vec![(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)]
    } else if i == 0 {
        vec![(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)]
    } else {
        vec![(0, 2.0 / h2), (-1, -5.0 / h2), (-2, 4.0 / h2), (-3, -1.0 / h2)]
    }
}

/// Weights for `[U_ξ, U_η, U_ξξ, U_ξη, U_ηη]` at one node.
#[derive(Debug, Clone, Default)]
pub struct LogicalStencil {
    pub d: [Vec<(usize, f64)>; 5],
}

impl LogicalStencil {
    pub fn apply(&self, u: &[f64]) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (k, w) in self.d.iter().enumerate() {
            out[k] = w.iter().map(|(c, a)| a * u[*c]).sum();
        }
        out
    }

    /// The same weights applied to each component of a vector field.
    pub fn apply_vec<const N: usize>(&self, u: &[[f64; N]]) -> [[f64; N]; 5] {
        let mut out = [[0.0; N]; 5];
        for (k, w) in self.d.iter().enumerate() {
            for (c, a) in w {
                for m in 0..N {
                    out[k][m] += a * u[*c][m];
                }
            }
        }
        out
    }
}

impl CurvGrid {
    /// Builds a grid from a logical map and a node classifier.
    pub fn from_map(
        domain: DomainSpec,
        nx: usize,
        ny: usize,
        map: GridMap,
        classify: impl Fn(usize, usize, Point) -> NodeKind,
    ) -> Result<Self> {
        let n = (nx + 1) * (ny + 1);
        let mut g = CurvGrid {
            nx,
            ny,
            domain,
            map,
            points: Vec::with_capacity(n),
            jac: Vec::with_capacity(n),
            hess: Vec::with_capacity(n),
            kinds: Vec::with_capacity(n),
        };
        for j in 0..=ny {
            for i in 0..=nx {
                let (p, jm, hs) = (g.map)(i as f64 / nx as f64, j as f64 / ny as f64);
                g.points.push(p);
                g.jac.push(jm);
                g.hess.push(hs);
                g.kinds.push(classify(i, j, p));
            }
        }
        for k in 0..n {
            if g.needs_metric(k) && !(det2(g.jac[k]) > 0.0) {
                let (i, j) = g.ij(k);
                return Err(Error::Degenerate(format!("grid map Jacobian {} at node ({i}, {j})", det2(g.jac[k]))));
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % (self.nx + 1), k / (self.nx + 1))
    }

    pub fn h(&self) -> (f64, f64) {
        (1.0 / self.nx as f64, 1.0 / self.ny as f64)
    }

    /// Nodes whose rows use the metric: interior nodes and Robin nodes.
    fn needs_metric(&self, k: usize) -> bool {
        match self.kinds[k] {
            NodeKind::Interior => true,
            NodeKind::Vertex { .. } => false,
            _ => self.row_rule(k).map(|r| matches!(r, RowRule::Robin { .. })).unwrap_or(false),
        }
    }

    pub fn stencil(&self, k: usize) -> LogicalStencil {
        let (i, j) = self.ij(k);
        let (hx, hy) = self.h();
        let at = |di: isize, dj: isize| self.index((i as isize + di) as usize, (j as isize + dj) as usize);
        let dx = d1(i, self.nx, hx);
        let dy = d1(j, self.ny, hy);
        let mut s = LogicalStencil::default();
        s.d[0] = dx.iter().map(|(o, w)| (at(*o, 0), *w)).collect();
        s.d[1] = dy.iter().map(|(o, w)| (at(0, *o), *w)).collect();
        s.d[2] = d2(i, self.nx, hx).iter().map(|(o, w)| (at(*o, 0), *w)).collect();
        s.d[4] = d2(j, self.ny, hy).iter().map(|(o, w)| (at(0, *o), *w)).collect();
        for (a, wa) in &dx {
            for (b, wb) in &dy {
                s.d[3].push((at(*a, *b), wa * wb));
            }
        }
        s
    }

    /// Jacobian and second derivatives of the map from the node stencil, so
    /// that affine functions are differentiated exactly.
    pub fn discrete_metric(&self, k: usize) -> (Mat2, Hess2) {
        let d = self.stencil(k).apply_vec(&self.points);
        let jm = [[d[0][0], d[1][0]], [d[0][1], d[1][1]]];
        let hs = [[d[2][0], d[3][0], d[4][0]], [d[2][1], d[3][1], d[4][1]]];
        (jm, hs)
    }

    /// Largest distance between consecutive boundary nodes.
    pub fn max_boundary_spacing(&self) -> f64 {
        let mut ring = Vec::new();
        for i in 0..=self.nx {
            ring.push(self.index(i, 0));
        }
        for j in 1..=self.ny {
            ring.push(self.index(self.nx, j));
        }
        for i in (0..self.nx).rev() {
            ring.push(self.index(i, self.ny));
        }
        for j in (0..self.ny).rev() {
            ring.push(self.index(0, j));
        }
        ring.windows(2)
            .map(|w| {
                let (a, b) = (self.points[w[0]], self.points[w[1]]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }

    fn row_rule(&self, k: usize) -> Result<RowRule> {
        let dom = &self.domain;
        match self.kinds[k] {
            NodeKind::Interior => Ok(RowRule::Interior),
            NodeKind::Edge { edge, t } => {
                let e = dom.edge(edge)?;
                Ok(match e.bc {
                    BcKind::Dirichlet => RowRule::Dirichlet { edge, t },
                    BcKind::Robin => RowRule::Robin { edge, t },
                })
            }
            NodeKind::Corner { corner } | NodeKind::Vertex { corner } => {
                let c = dom.corner(corner)?;
                let (ein, eout) = (dom.edge(c.incoming_edge)?, dom.edge(c.outgoing_edge)?);
                let vertex = matches!(self.kinds[k], NodeKind::Vertex { .. });
                if ein.bc == BcKind::Dirichlet {
                    Ok(RowRule::Dirichlet { edge: ein.id, t: 1.0 })
                } else if eout.bc == BcKind::Dirichlet {
                    Ok(RowRule::Dirichlet { edge: eout.id, t: 0.0 })
                } else if vertex {
                    Ok(RowRule::Pinned)
                } else if ein.id < eout.id {
                    Ok(RowRule::Robin { edge: ein.id, t: 1.0 })
                } else {
                    Ok(RowRule::Robin { edge: eout.id, t: 0.0 })
                }
            }
        }
    }

    /// Boundary edge ids a node belongs to (empty for interior nodes).
    pub fn node_edges(&self, k: usize) -> Vec<usize> {
        match self.kinds[k] {
            NodeKind::Interior => Vec::new(),
            NodeKind::Edge { edge, .. } => vec![edge],
            NodeKind::Corner { corner } | NodeKind::Vertex { corner } => match self.domain.corner(corner) {
                Ok(c) => vec![c.incoming_edge, c.outgoing_edge],
                Err(_) => Vec::new(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RowRule {
    Interior,
    Dirichlet { edge: usize, t: f64 },
    Robin { edge: usize, t: f64 },
    Pinned,
}

/// Split angle of the half-disk arc: the side pieces and the top each cover `π/3`.
const SPLIT: f64 = PI / 3.0;

fn arc_point(th: f64, dth: f64) -> (Point, Point) {
    let (s, c) = if th == PI { (0.0, -1.0) } else { th.sin_cos() };
    ([c, s], [-s * dth, c * dth])
}

/// Coons patch of the unit upper half disk. The bottom side is `Γ₂`, the
/// other three sides cover `Γ₁` with split points at angles `π/3` and
/// `2π/3`. Corners `S₁`, `S₂` are the logical corners `(0,0)`, `(1,0)`.
pub fn build_halfdisk_grid(n: usize) -> Result<CurvGrid> {
    build_halfdisk_grid_on(crate::domain::make_half_disk(), n)
}

/// As [`build_halfdisk_grid`] for a half-disk domain with other coefficients.
pub fn build_halfdisk_grid_on(domain: DomainSpec, n: usize) -> Result<CurvGrid> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("half-disk grid needs n ≥ 8, got {n}")));
    }
    let top_span = PI - 2.0 * SPLIT;
    let map: GridMap = Arc::new(move |xi: f64, eta: f64| {
        // Sides with first and second derivatives in their own parameter.
        let bottom = ([-1.0 + 2.0 * xi, 0.0], [2.0, 0.0], [0.0, 0.0]);
        let side = |th: f64, dth: f64| {
            let (p, d) = arc_point(th, dth);
            (p, d, [-p[0] * dth * dth, -p[1] * dth * dth])
        };
        let top = side(PI - SPLIT - top_span * xi, -top_span);
        let left = side(PI - SPLIT * eta, -SPLIT);
        let right = side(SPLIT * eta, SPLIT);
        let c00 = [-1.0, 0.0];
        let c10 = [1.0, 0.0];
        let c01 = [(PI - SPLIT).cos(), (PI - SPLIT).sin()];
        let c11 = [SPLIT.cos(), SPLIT.sin()];
        let mut p = [0.0; 2];
        let mut jm = [[0.0; 2]; 2];
        let mut hs = [[0.0; 3]; 2];
        for m in 0..2 {
            let bil = (1.0 - xi) * (1.0 - eta) * c00[m] + xi * (1.0 - eta) * c10[m] + (1.0 - xi) * eta * c01[m] + xi * eta * c11[m];
            p[m] = (1.0 - eta) * bottom.0[m] + eta * top.0[m] + (1.0 - xi) * left.0[m] + xi * right.0[m] - bil;
            let bil_x = -(1.0 - eta) * c00[m] + (1.0 - eta) * c10[m] - eta * c01[m] + eta * c11[m];
            let bil_y = -(1.0 - xi) * c00[m] - xi * c10[m] + (1.0 - xi) * c01[m] + xi * c11[m];
            let bil_xy = c00[m] - c10[m] - c01[m] + c11[m];
            jm[m][0] = (1.0 - eta) * bottom.1[m] + eta * top.1[m] - left.0[m] + right.0[m] - bil_x;
            jm[m][1] = -bottom.0[m] + top.0[m] + (1.0 - xi) * left.1[m] + xi * right.1[m] - bil_y;
            hs[m][0] = (1.0 - eta) * bottom.2[m] + eta * top.2[m];
            hs[m][1] = -bottom.1[m] + top.1[m] - left.1[m] + right.1[m] - bil_xy;
            hs[m][2] = (1.0 - xi) * left.2[m] + xi * right.2[m];
        }
        (p, jm, hs)
    });
    let classify = move |i: usize, j: usize, p: Point| {
        let xi = i as f64 / n as f64;
        if j == 0 {
            if i == 0 {
                NodeKind::Corner { corner: 1 }
            } else if i == n {
                NodeKind::Corner { corner: 2 }
            } else {
                NodeKind::Edge { edge: GAMMA2, t: xi }
            }
        } else if i == 0 || i == n || j == n {
            NodeKind::Edge { edge: GAMMA1, t: p[1].atan2(p[0]) / PI }
        } else {
            NodeKind::Interior
        }
    };
    CurvGrid::from_map(domain, n, n, map, classify)
}

/// Polar tensor grid of the sector from [`crate::domain::make_sector`]:
/// `ξ = r`, `η = θ/ω`. The `i = 0` column collapses onto the vertex.
pub fn build_sector_grid(domain: DomainSpec, omega: f64, n: usize) -> Result<CurvGrid> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("sector grid needs n ≥ 4, got {n}")));
    }
    let map: GridMap = Arc::new(move |r: f64, eta: f64| {
        let th = omega * eta;
        let (s, c) = th.sin_cos();
        let p = [r * c, r * s];
        let jm = [[c, -r * s * omega], [s, r * c * omega]];
        let hs = [[0.0, -s * omega, -r * c * omega * omega], [0.0, c * omega, -r * s * omega * omega]];
        (p, jm, hs)
    });
    let classify = move |i: usize, j: usize, _p: Point| {
        let r = i as f64 / n as f64;
        if i == 0 {
            NodeKind::Vertex { corner: 0 }
        } else if i == n && j == 0 {
            NodeKind::Corner { corner: 1 }
        } else if i == n && j == n {
            NodeKind::Corner { corner: 2 }
        } else if i == n {
            NodeKind::Edge { edge: SECTOR_ARC, t: j as f64 / n as f64 }
        } else if j == 0 {
            NodeKind::Edge { edge: SECTOR_RIGHT, t: r }
        } else if j == n {
            NodeKind::Edge { edge: SECTOR_LEFT, t: 1.0 - r }
        } else {
            NodeKind::Interior
        }
    };
    CurvGrid::from_map(domain, n, n, map, classify)
}

/// `J u = a_ij D_ij u + b_i D_i u + c u` in the interior with data `f`, and
/// per-edge boundary data `g_j`. Edge kinds and the Robin coefficients `β`,
/// `d` come from the grid's domain.
#[derive(Clone)]
pub struct MixedBVP {
    /// `[a11, a12, a22]`.
    pub a: Arc<dyn Fn(Point) -> [f64; 3] + Send + Sync>,
    pub b: Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>,
    pub c: ScalarFn,
    pub f: ScalarFn,
    pub g: Vec<(usize, EdgeDataFn)>,
}

impl MixedBVP {
    /// `Δu = 0` with zero boundary data.
    pub fn laplace() -> Self {
        Self {
            a: Arc::new(|_| [1.0, 0.0, 1.0]),
            b: Arc::new(|_| [0.0, 0.0]),
            c: Arc::new(|_| 0.0),
            f: Arc::new(|_| 0.0),
            g: Vec::new(),
        }
    }

    pub fn with_c(mut self, c: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.c = Arc::new(c);
        self
    }

    pub fn with_rhs(mut self, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    pub fn with_edge_data(mut self, edge: usize, g: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g.retain(|(e, _)| *e != edge);
        self.g.push((edge, Arc::new(g)));
        self
    }

    pub fn edge_data(&self, edge: usize, p: Point, t: f64) -> f64 {
        self.g.iter().find(|(e, _)| *e == edge).map(|(_, g)| g(p, t)).unwrap_or(0.0)
    }

    /// Smallest eigenvalue of `a` over the grid nodes.
    pub fn ellipticity(&self, grid: &CurvGrid) -> f64 {
        grid.points
            .iter()
            .map(|p| {
                let [a11, a12, a22] = (self.a)(*p);
                0.5 * (a11 + a22) - (0.5 * (a11 - a22)).hypot(a12)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `J` applied to a jet.
    pub fn apply_jet(&self, p: Point, u: &Jet2) -> f64 {
        let [a11, a12, a22] = (self.a)(p);
        let b = (self.b)(p);
        a11 * u.h[0] + 2.0 * a12 * u.h[1] + a22 * u.h[2] + b[0] * u.g[0] + b[1] * u.g[1] + (self.c)(p) * u.v
    }
}

/// Assembled square system; row `k` belongs to node `k`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
}

/// Interior row weights of `J` at node `k`.
fn interior_row(grid: &CurvGrid, bvp: &MixedBVP, k: usize) -> Vec<(usize, f64)> {
    let p = grid.points[k];
    let (jm, hs) = (grid.jac[k], grid.hess[k]);
    let kinv = inv2(jm);
    let [a11, a12, a22] = (bvp.a)(p);
    let a = [[a11, a12], [a12, a22]];
    let mut pm = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    pm[r][s] += kinv[r][i] * a[i][j] * kinv[s][j];
                }
            }
        }
    }
    let b = (bvp.b)(p);
    let bt = [0, 1].map(|m| b[m] - (pm[0][0] * hs[m][0] + 2.0 * pm[0][1] * hs[m][1] + pm[1][1] * hs[m][2]));
    let q = [kinv[0][0] * bt[0] + kinv[0][1] * bt[1], kinv[1][0] * bt[0] + kinv[1][1] * bt[1]];
    let coef = [q[0], q[1], pm[0][0], 2.0 * pm[0][1], pm[1][1]];
    let st = grid.stencil(k);
    let mut row = vec![(k, (bvp.c)(p))];
    for (d, c) in st.d.iter().zip(coef) {
        for (col, w) in d {
            row.push((*col, c * w));
        }
    }
    row
}

/// Robin row weights of `∂_ν u + β∂_τ u + d u` at node `k` on `edge`.
fn robin_row(grid: &CurvGrid, k: usize, edge: usize, t: f64) -> Result<Vec<(usize, f64)>> {
    let e = grid.domain.edge(edge)?;
    let fr = grid.domain.edge_frame(edge, t)?;
    let beta = e.beta.value(t);
    let d = e.dcoef.value(t);
    let kinv = inv2(grid.jac[k]);
    let dir = [fr.normal[0] + beta * fr.tangent[0], fr.normal[1] + beta * fr.tangent[1]];
    let q = [kinv[0][0] * dir[0] + kinv[0][1] * dir[1], kinv[1][0] * dir[0] + kinv[1][1] * dir[1]];
    let st = grid.stencil(k);
    let mut row = vec![(k, d)];
    for (m, qm) in q.iter().enumerate() {
        for (col, w) in &st.d[m] {
            row.push((*col, qm * w));
        }
    }
    Ok(row)
}

enum Row {
    Weights(Vec<(usize, f64)>, f64),
}

fn build_row(grid: &CurvGrid, bvp: &MixedBVP, k: usize) -> Result<Row> {
    let p = grid.points[k];
    Ok(match grid.row_rule(k)? {
        RowRule::Interior => Row::Weights(interior_row(grid, bvp, k), (bvp.f)(p)),
        RowRule::Dirichlet { edge, t } => Row::Weights(vec![(k, 1.0)], bvp.edge_data(edge, p, t)),
        RowRule::Robin { edge, t } => Row::Weights(robin_row(grid, k, edge, t)?, bvp.edge_data(edge, p, t)),
        RowRule::Pinned => Row::Weights(vec![(k, 1.0)], 0.0),
    })
}

fn bandwidth(grid: &CurvGrid) -> usize {
    3 * (grid.nx + 1) + 3
}

/// Assembles the mixed problem on `grid`.
pub fn assemble(bvp: &MixedBVP, grid: &CurvGrid) -> Result<LinearSystem> {
    let alpha = bvp.ellipticity(grid);
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("operator is not uniformly elliptic (α = {alpha})")));
    }
    let n = grid.len();
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<Row>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(|k| build_row(grid, bvp, k)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<Row>> = (0..n).map(|k| build_row(grid, bvp, k)).collect();
    let bw = bandwidth(grid);
    let mut m = BandMatrix::new(n, bw, bw);
    let mut rhs = vec![0.0; n];
    for (k, r) in rows.into_iter().enumerate() {
        let Row::Weights(w, b) = r?;
        for (c, v) in w {
            m.add(k, c, v)?;
        }
        rhs[k] = b;
    }
    Ok(LinearSystem { matrix: m, rhs })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Banded LU solve with one step of iterative refinement.
pub fn solve(sys: &LinearSystem) -> Result<GridField> {
    let lu = sys.matrix.clone().factor()?;
    let mut x = lu.solve(&sys.rhs);
    let scale = |x: &[f64]| {
        let n = sys.matrix.dim();
        let amax = (0..n).map(|i| sys.matrix.row_max(i)).fold(0.0, f64::max);
        amax * inf_norm(x) + inf_norm(&sys.rhs)
    };
    for _ in 0..2 {
        let ax = sys.matrix.matvec(&x);
        let r: Vec<f64> = sys.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let rel = inf_norm(&r) / scale(&x).max(f64::MIN_POSITIVE);
        if rel <= 1e-13 {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let ax = sys.matrix.matvec(&x);
    let r: Vec<f64> = sys.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let rel = inf_norm(&r) / scale(&x).max(f64::MIN_POSITIVE);
    if !(rel <= 1e-10) {
        return Err(Error::Degenerate(format!("near-singular system: relative residual {rel:e}")));
    }
    Ok(GridField::new("u", x))
}

/// Assemble and solve.
pub fn solve_bvp(bvp: &MixedBVP, grid: &CurvGrid) -> Result<GridField> {
    solve(&assemble(bvp, grid)?)
}

fn term_value(term: &SingularTerm, p: Point) -> Result<f64> {
    let (r, th) = local_polar(term, p);
    eval_singular(term, r, th)
}

/// Subtracts `Σ c_k S_k` from the data, solves for the remainder and adds the
/// singular part back. Returns `(solution, remainder)`.
pub fn solve_with_singular_subtraction(
    bvp: &MixedBVP,
    grid: &CurvGrid,
    terms: &[(SingularTerm, f64)],
) -> Result<(GridField, GridField)> {
    if terms.is_empty() {
        let u = solve_bvp(bvp, grid)?;
        return Ok((u.clone(), GridField::new("remainder", u.values)));
    }
    let terms: Arc<Vec<(SingularTerm, f64)>> = Arc::new(terms.to_vec());
    let mut red = bvp.clone();
    let (tf, base, op) = (terms.clone(), bvp.f.clone(), bvp.clone());
    red.f = Arc::new(move |p| {
        let mut v = base(p);
        for (t, c) in tf.iter() {
            if let Ok(j) = eval_singular_jet(t, p) {
                v -= c * op.apply_jet(p, &j);
            }
        }
        v
    });
    red.g.clear();
    for e in &grid.domain.edges {
        let (tg, old, edge) = (terms.clone(), bvp.clone(), e.clone());
        let id = e.id;
        let frames = grid.domain.clone();
        red.g.push((
            id,
            Arc::new(move |p: Point, t: f64| {
                let mut v = old.edge_data(id, p, t);
                for (term, c) in tg.iter() {
                    let s = match edge.bc {
                        BcKind::Dirichlet => term_value(term, p).unwrap_or(0.0),
                        BcKind::Robin => {
                            let Ok(j) = eval_singular_jet(term, p) else { continue };
                            let Ok(fr) = frames.edge_frame(id, t) else { continue };
                            j.directional(fr.normal) + edge.beta.value(t) * j.directional(fr.tangent)
                                + edge.dcoef.value(t) * j.v
                        }
                    };
                    v -= c * s;
                }
                v
            }),
        ));
    }
    let w = solve_bvp(&red, grid)?;
    let mut u = w.values.clone();
    for (k, p) in grid.points.iter().enumerate() {
        for (term, c) in terms.iter() {
            u[k] += c * term_value(term, *p)?;
        }
    }
    Ok((GridField::new("u", u), GridField::new("remainder", w.values)))
}

/// Discrete evaluation of the maximum-principle bound
/// `‖u‖₀ ≤ ‖Ju‖₀ + Σ_D ‖u‖₀ + Σ_R ‖∂_ν u + β∂_τ u + d u‖₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct C0Report {
    pub lhs: f64,
    pub rhs: f64,
    pub h: f64,
    pub violated: bool,
    /// Largest `|u|` at corners joining two Robin edges (the bound assumes 0 there).
    pub robin_corner_value: f64,
}

/// Requires `c ≤ −1` at every node and `d ≥ 1` on every Robin edge.
pub fn c0_bound_check(bvp: &MixedBVP, grid: &CurvGrid, u: &GridField) -> Result<C0Report> {
    if u.values.len() != grid.len() {
        return Err(Error::InvalidArgument("field length does not match the grid".into()));
    }
    if let Some(p) = grid.points.iter().find(|p| (bvp.c)(**p) > -1.0) {
        return Err(Error::InvalidArgument(format!("c > −1 at {p:?}")));
    }
    for e in grid.domain.edges.iter().filter(|e| e.bc == BcKind::Robin) {
        for i in 0..=64 {
            let t = i as f64 / 64.0;
            if e.dcoef.value(t) < 1.0 {
                return Err(Error::InvalidArgument(format!("d < 1 on edge {}", e.id)));
            }
        }
    }
    let sys = assemble(bvp, grid)?;
    let au = sys.matrix.matvec(&u.values);
    let mut interior = 0.0f64;
    let mut per_edge: Vec<(usize, f64)> = grid.domain.edges.iter().map(|e| (e.id, 0.0)).collect();
    let mut corner_val = 0.0f64;
    for k in 0..grid.len() {
        match grid.row_rule(k)? {
            RowRule::Interior => interior = interior.max(au[k].abs()),
            RowRule::Dirichlet { edge, .. } | RowRule::Robin { edge, .. } => {
                for e in grid.node_edges(k) {
                    let robin = grid.domain.edge(e)?.bc == BcKind::Robin;
                    let v = if robin && e != edge {
                        robin_row(grid, k, e, node_t(grid, k, e))?.iter().map(|(c, w)| w * u.values[*c]).sum::<f64>()
                    } else {
                        au[k]
                    };
                    if let Some(s) = per_edge.iter_mut().find(|(id, _)| *id == e) {
                        s.1 = s.1.max(v.abs());
                    }
                }
            }
            RowRule::Pinned => corner_val = corner_val.max(u.values[k].abs()),
        }
        if let NodeKind::Corner { .. } = grid.kinds[k] {
            let es = grid.node_edges(k);
            if es.iter().all(|e| grid.domain.edge(*e).map(|x| x.bc == BcKind::Robin).unwrap_or(false)) {
                corner_val = corner_val.max(u.values[k].abs());
            }
        }
    }
    let lhs = u.max_abs();
    let rhs = interior + per_edge.iter().map(|(_, v)| v).sum::<f64>();
    let h = grid.max_boundary_spacing();
    Ok(C0Report { lhs, rhs, h, violated: lhs > rhs + 10.0 * h, robin_corner_value: corner_val })
}

fn node_t(grid: &CurvGrid, k: usize, edge: usize) -> f64 {
    match grid.kinds[k] {
        NodeKind::Edge { t, .. } => t,
        NodeKind::Corner { corner } | NodeKind::Vertex { corner } => match grid.domain.corner(corner) {
            Ok(c) if c.incoming_edge == edge => 1.0,
            _ => 0.0,
        },
        NodeKind::Interior => 0.0,
    }
}

/// Max nodal error against an exact solution.
pub fn max_error(grid: &CurvGrid, u: &GridField, exact: impl Fn(Point) -> f64) -> f64 {
    grid.points.iter().zip(&u.values).map(|(p, v)| (v - exact(*p)).abs()).fold(0.0, f64::max)
}

/// `log2(e_k / e_{k+1})` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Manufactured mixed problem on the half disk: `u = x² − y²`, Dirichlet on
/// `Γ₁`, homogeneous Neumann on `Γ₂`.
pub fn manufactured_mixed() -> (MixedBVP, fn(Point) -> f64) {
    fn u(p: Point) -> f64 {
        p[0] * p[0] - p[1] * p[1]
    }
    (MixedBVP::laplace().with_edge_data(GAMMA1, |p, _| u(p)), u)
}
