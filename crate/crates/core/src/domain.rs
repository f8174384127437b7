//! Curvilinear polygonal domains with boundary-condition tags.
//!
//! Edges are ordered counterclockwise. Corner `j` joins its incoming edge
//! (which ends there) to its outgoing edge (which starts there); the local
//! polar angle at a corner is measured from the outgoing edge through the
//! interior, so the outgoing edge is `θ = 0` and the incoming edge is `θ = ω`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Position with first and second parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
}

pub type CurveFn = Arc<dyn Fn(f64) -> CurvePoint + Send + Sync>;

/// Parametrization of an edge over `[0, 1]`.
#[derive(Clone)]
pub enum Curve {
    Segment { a: Point, b: Point },
    /// `center + radius·(cos θ, sin θ)` with `θ = theta0 + t·(theta1 − theta0)`.
    Arc { center: Point, radius: f64, theta0: f64, theta1: f64 },
    Custom(CurveFn),
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Segment { a, b } => write!(f, "Segment({a:?} -> {b:?})"),
            Curve::Arc { center, radius, theta0, theta1 } => {
                write!(f, "Arc(c={center:?}, r={radius}, {theta0}..{theta1})")
            }
            Curve::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Curve {
    pub fn eval(&self, t: f64) -> CurvePoint {
        match self {
            Curve::Segment { a, b } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                CurvePoint { p: [a[0] + t * d[0], a[1] + t * d[1]], d1: d, d2: [0.0; 2] }
            }
            Curve::Arc { center, radius, theta0, theta1 } => {
                let dt = theta1 - theta0;
                let th = theta0 + t * dt;
                let (s, c) = th.sin_cos();
                CurvePoint {
                    p: [center[0] + radius * c, center[1] + radius * s],
                    d1: [-radius * dt * s, radius * dt * c],
                    d2: [-radius * dt * dt * c, -radius * dt * dt * s],
                }
            }
            Curve::Custom(f) => f(t),
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.eval(t).p
    }
}

/// Scalar coefficient along an edge, as a function of the edge parameter.
#[derive(Clone)]
pub enum EdgeField {
    Const(f64),
    /// Coefficients in increasing degree of `t`.
    Poly(Vec<f64>),
    /// Value and `d/dt`.
    Custom(Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>),
}

impl fmt::Debug for EdgeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeField::Const(c) => write!(f, "Const({c})"),
            EdgeField::Poly(p) => write!(f, "Poly({p:?})"),
            EdgeField::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl EdgeField {
    pub fn zero() -> Self {
        EdgeField::Const(0.0)
    }

    /// Value and derivative with respect to the edge parameter.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        match self {
            EdgeField::Const(c) => [*c, 0.0],
            EdgeField::Poly(c) => {
                let mut v = 0.0;
                let mut d = 0.0;
                for a in c.iter().rev() {
                    d = d * t + v;
                    v = v * t + a;
                }
                [v, d]
            }
            EdgeField::Custom(f) => f(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    pub fn is_constant(&self) -> bool {
        match self {
            EdgeField::Const(_) => true,
            EdgeField::Poly(c) => c.iter().skip(1).all(|a| *a == 0.0),
            EdgeField::Custom(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    Dirichlet,
    Robin,
}

#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: usize,
    pub curve: Curve,
    pub bc: BcKind,
    /// Tangential coefficient `β` of the Robin condition.
    pub beta: EdgeField,
    /// Zero-order coefficient `d` of the Robin condition.
    pub dcoef: EdgeField,
}

impl EdgeSpec {
    pub fn new(id: usize, curve: Curve, bc: BcKind) -> Self {
        Self { id, curve, bc, beta: EdgeField::zero(), dcoef: EdgeField::zero() }
    }

    pub fn with_coefficients(mut self, beta: EdgeField, dcoef: EdgeField) -> Self {
        self.beta = beta;
        self.dcoef = dcoef;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerSpec {
    pub id: usize,
    pub position: Point,
    pub angle: f64,
    pub incoming_edge: usize,
    pub outgoing_edge: usize,
    pub phi_in: f64,
    pub phi_out: f64,
    /// Corners introduced only to bound an otherwise unbounded model domain.
    pub artificial: bool,
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub name: String,
    pub edges: Vec<EdgeSpec>,
    pub corners: Vec<CornerSpec>,
}

/// Point, unit tangent and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub point: Point,
    pub tangent: Point,
    pub normal: Point,
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Counterclockwise angle from `a` to `b` in `(0, 2π]`.
pub fn ccw_angle(a: Point, b: Point) -> f64 {
    let ang = cross(a, b).atan2(dot(a, b));
    if ang <= 0.0 {
        ang + TAU
    } else {
        ang
    }
}

/// Boundary phase of an edge at a corner: `π/2` for Dirichlet, `arctan β` for Robin.
pub fn edge_phase(edge: &EdgeSpec, t: f64) -> f64 {
    match edge.bc {
        BcKind::Dirichlet => FRAC_PI_2,
        BcKind::Robin => edge.beta.value(t).atan(),
    }
}

impl DomainSpec {
    /// Assembles a domain from counterclockwise edges; corner `k` sits at the
    /// end of edge `k` and the start of edge `k + 1`. Angles and phases are
    /// computed from the curves.
    pub fn from_edges(name: &str, edges: Vec<EdgeSpec>) -> Result<Self> {
        let n = edges.len();
        if n < 2 {
            return Err(Error::InvalidArgument("a domain needs at least two edges".into()));
        }
        let mut corners = Vec::with_capacity(n);
        for k in 0..n {
            let ein = &edges[k];
            let eout = &edges[(k + 1) % n];
            let a = ein.curve.eval(1.0);
            let b = eout.curve.eval(0.0);
            let t_in = a.d1;
            let t_out = b.d1;
            if norm(t_in) == 0.0 || norm(t_out) == 0.0 {
                return Err(Error::Degenerate(format!("zero tangent at corner {k}")));
            }
            corners.push(CornerSpec {
                id: k,
                position: b.p,
                angle: ccw_angle(t_out, [-t_in[0], -t_in[1]]),
                incoming_edge: ein.id,
                outgoing_edge: eout.id,
                phi_in: edge_phase(ein, 1.0),
                phi_out: edge_phase(eout, 0.0),
                artificial: false,
            });
        }
        let d = Self { name: name.into(), edges, corners };
        d.validate()?;
        Ok(d)
    }

    pub fn edge(&self, id: usize) -> Result<&EdgeSpec> {
        self.edges
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("no edge with id {id}")))
    }

    pub fn corner(&self, id: usize) -> Result<&CornerSpec> {
        self.corners
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("no corner with id {id}")))
    }

    /// Checks endpoint matching, corner angles, phases and edge regularity.
    pub fn validate(&self) -> Result<()> {
        for c in &self.corners {
            if !(c.angle > 0.0 && c.angle < TAU) {
                return Err(Error::Degenerate(format!("corner {} angle {} outside (0, 2π)", c.id, c.angle)));
            }
            let ein = self.edge(c.incoming_edge)?;
            let eout = self.edge(c.outgoing_edge)?;
            let a = ein.curve.eval(1.0);
            let b = eout.curve.eval(0.0);
            for q in [a.p, b.p] {
                if norm([q[0] - c.position[0], q[1] - c.position[1]]) > 1e-12 {
                    return Err(Error::Degenerate(format!("edge endpoints do not meet at corner {}", c.id)));
                }
            }
            let ang = ccw_angle(b.d1, [-a.d1[0], -a.d1[1]]);
            if (ang - c.angle).abs() > 1e-10 {
                return Err(Error::Degenerate(format!(
                    "corner {} stores angle {} but tangents give {}",
                    c.id, c.angle, ang
                )));
            }
            if (edge_phase(ein, 1.0) - c.phi_in).abs() > 1e-12 || (edge_phase(eout, 0.0) - c.phi_out).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("corner {} phases disagree with edge data", c.id)));
            }
        }
        for e in &self.edges {
            let samples = 64;
            let pts: Vec<Point> = (0..=samples).map(|i| e.curve.point(i as f64 / samples as f64)).collect();
            for i in 0..=samples {
                let cp = e.curve.eval(i as f64 / samples as f64);
                if !(norm(cp.d1) > 0.0) {
                    return Err(Error::Degenerate(format!("edge {} is not regular", e.id)));
                }
            }
            for i in 0..pts.len() {
                for j in (i + 2)..pts.len() {
                    if norm([pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]]) < 1e-12 {
                        return Err(Error::Degenerate(format!("edge {} is not injective", e.id)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Point, unit tangent and outward normal on edge `edge_id` at parameter `t`.
    pub fn edge_frame(&self, edge_id: usize, t: f64) -> Result<Frame> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("edge parameter {t} outside [0, 1]")));
        }
        let e = self.edge(edge_id)?;
        let cp = e.curve.eval(t);
        let l = norm(cp.d1);
        if !(l > 0.0) {
            return Err(Error::Degenerate(format!("edge {edge_id} has zero speed at t = {t}")));
        }
        let tau = [cp.d1[0] / l, cp.d1[1] / l];
        Ok(Frame { point: cp.p, tangent: tau, normal: [tau[1], -tau[0]] })
    }

    /// Polyline approximation of the boundary, `per_edge` segments per edge.
    pub fn boundary_polyline(&self, per_edge: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.edges.len() * per_edge);
        for e in &self.edges {
            for i in 0..per_edge {
                out.push(e.curve.point(i as f64 / per_edge as f64));
            }
        }
        out
    }

    /// Winding-number test against a fine boundary polyline.
    pub fn contains(&self, p: Point) -> bool {
        let poly = self.boundary_polyline(512);
        let mut wind = 0i32;
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            if a[1] <= p[1] {
                if b[1] > p[1] && cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]) > 0.0 {
                    wind += 1;
                }
            } else if b[1] <= p[1] && cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]) < 0.0 {
                wind -= 1;
            }
        }
        wind != 0
    }

    /// Distance from corner `id` to the nearest other corner.
    pub fn corner_separation(&self, id: usize) -> Result<f64> {
        let c = self.corner(id)?;
        Ok(self
            .corners
            .iter()
            .filter(|o| o.id != id)
            .map(|o| norm([o.position[0] - c.position[0], o.position[1] - c.position[1]]))
            .fold(f64::INFINITY, f64::min))
    }
}

pub const GAMMA1: usize = 1;
pub const GAMMA2: usize = 2;

/// The unit upper half disk with `Γ₁` (arc, id 1) Dirichlet and `Γ₂`
/// (diameter, id 2) Robin with `β = d = 0`. Corner 1 is `S₁ = (−1, 0)`,
/// corner 2 is `S₂ = (1, 0)`.
pub fn make_half_disk() -> DomainSpec {
    make_half_disk_with(EdgeField::zero(), EdgeField::zero())
}

pub fn make_half_disk_with(beta: EdgeField, dcoef: EdgeField) -> DomainSpec {
    let arc = EdgeSpec::new(GAMMA1, Curve::Arc { center: [0.0, 0.0], radius: 1.0, theta0: 0.0, theta1: PI }, BcKind::Dirichlet);
    let diam = EdgeSpec::new(GAMMA2, Curve::Segment { a: [-1.0, 0.0], b: [1.0, 0.0] }, BcKind::Robin)
        .with_coefficients(beta, dcoef);
    let mk = |id, pos, ein: &EdgeSpec, eout: &EdgeSpec, tin, tout| CornerSpec {
        id,
        position: pos,
        angle: FRAC_PI_2,
        incoming_edge: ein.id,
        outgoing_edge: eout.id,
        phi_in: edge_phase(ein, tin),
        phi_out: edge_phase(eout, tout),
        artificial: false,
    };
    let corners = vec![mk(1, [-1.0, 0.0], &arc, &diam, 1.0, 0.0), mk(2, [1.0, 0.0], &diam, &arc, 1.0, 0.0)];
    DomainSpec { name: "half_disk".into(), edges: vec![arc, diam], corners }
}

pub const SECTOR_RIGHT: usize = 0;
pub const SECTOR_ARC: usize = 1;
pub const SECTOR_LEFT: usize = 2;

/// Sector `{0 < θ < ω, r < 1}`. Edge 0 is the `θ = 0` segment (`bc_right`),
/// edge 1 the Dirichlet arc, edge 2 the `θ = ω` segment (`bc_left`).
/// Corner 0 is the vertex; corners 1 and 2 are artificial.
pub fn make_sector(omega: f64, bc_left: BcKind, bc_right: BcKind) -> Result<DomainSpec> {
    if !(omega > 0.0 && omega < TAU) {
        return Err(Error::InvalidArgument(format!("sector angle {omega} outside (0, 2π)")));
    }
    let far = [omega.cos(), omega.sin()];
    let e0 = EdgeSpec::new(SECTOR_RIGHT, Curve::Segment { a: [0.0, 0.0], b: [1.0, 0.0] }, bc_right);
    let e1 = EdgeSpec::new(SECTOR_ARC, Curve::Arc { center: [0.0, 0.0], radius: 1.0, theta0: 0.0, theta1: omega }, BcKind::Dirichlet);
    let e2 = EdgeSpec::new(SECTOR_LEFT, Curve::Segment { a: far, b: [0.0, 0.0] }, bc_left);
    let corner = |id, pos, ein: &EdgeSpec, eout: &EdgeSpec, angle, artificial| CornerSpec {
        id,
        position: pos,
        angle,
        incoming_edge: ein.id,
        outgoing_edge: eout.id,
        phi_in: edge_phase(ein, 1.0),
        phi_out: edge_phase(eout, 0.0),
        artificial,
    };
    let corners = vec![
        corner(0, [0.0, 0.0], &e2, &e0, omega, false),
        corner(1, [1.0, 0.0], &e0, &e1, FRAC_PI_2, true),
        corner(2, far, &e1, &e2, FRAC_PI_2, true),
    ];
    let d = DomainSpec { name: "sector".into(), edges: vec![e0, e1, e2], corners };
    d.validate()?;
    Ok(d)
}
