//! Inverse trace on a curvilinear polygon.
//!
//! Each corner gets a chart straightening its two edges onto the coordinate
//! axes, where the quadrant or half-plane construction applies. The corner
//! fields are localized by radial cutoffs, and whatever boundary residual
//! remains along an edge is removed by a thin edge-local extension.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::data::Data1d;
use super::field::{BBox, ExtensionField};
use super::halfplane::halfplane_extension;
use super::kernel::t_x_extend;
use super::quadrant::{quadrant_extension, EdgeCondition};
use super::cutoff::PlateauCutoff;
use crate::domain::{BcKind, CornerSpec, Curve, DomainSpec, EdgeSpec, Point};
use crate::jet::Jet2;
use crate::smooth::{radial, ramp_down, step};
use crate::{Error, Result};

/// Boundary data on one edge as a function of the edge parameter `t`,
/// returning `[g, g_t, g_tt]`. Dirichlet edges prescribe the trace; Robin
/// edges prescribe `∂_ν u + β∂_τ u`. The closure may be evaluated slightly
/// outside `[0, 1]` and should extend smoothly there.
pub type EdgeData = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

type Mat2 = [[f64; 2]; 2];
type Hess2 = [[f64; 3]; 2];

const DATA_PLATEAU: f64 = 1.5;
const DATA_SUPPORT: f64 = 2.5;
const SCALE_FRACTION: f64 = 0.3;
const RESIDUAL_SAMPLES: f64 = 400.0;
const FD_STEP: f64 = 1e-6;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// Angle of `d` measured from the direction `theta0`, in `(−π, π]`.
fn angle_from(d: Point, theta0: f64) -> f64 {
    let e = [theta0.cos(), theta0.sin()];
    cross(e, d).atan2(dot(e, d))
}

/// Gradient and Hessian of the polar angle about the origin at `d`.
fn angle_jet(d: Point) -> (Point, [f64; 3]) {
    let r2 = dot(d, d);
    let r4 = r2 * r2;
    let (x, y) = (d[0], d[1]);
    ([-y / r2, x / r2], [2.0 * x * y / r4, (y * y - x * x) / r4, -2.0 * x * y / r4])
}

/// Gradient and Hessian of the radius about the origin at `d`.
fn radius_jet(d: Point) -> (Point, [f64; 3]) {
    let r = norm(d);
    let (ux, uy) = (d[0] / r, d[1] / r);
    ([ux, uy], [(1.0 - ux * ux) / r, -ux * uy / r, (1.0 - uy * uy) / r])
}

/// Oblique direction `μ = ν + βτ` and its `t`-derivative.
fn oblique_direction(edge: &EdgeSpec, t: f64) -> (Point, Point) {
    let c = edge.curve.eval(t);
    let sp = norm(c.d1);
    let tau = [c.d1[0] / sp, c.d1[1] / sp];
    let k = dot(c.d2, tau);
    let dtau = [(c.d2[0] - k * tau[0]) / sp, (c.d2[1] - k * tau[1]) / sp];
    let nu = [tau[1], -tau[0]];
    let dnu = [dtau[1], -dtau[0]];
    let [b, db] = edge.beta.eval(t);
    (
        [nu[0] + b * tau[0], nu[1] + b * tau[1]],
        [dnu[0] + b * dtau[0] + db * tau[0], dnu[1] + b * dtau[1] + db * tau[1]],
    )
}

fn edge_length(edge: &EdgeSpec) -> Result<f64> {
    match &edge.curve {
        Curve::Segment { a, b } => Ok(norm(sub(*b, *a))),
        Curve::Arc { radius, theta0, theta1, .. } => Ok(radius * (theta1 - theta0).abs()),
        Curve::Custom(_) => Err(Error::Partition(format!("edge {} has an unsupported curve type", edge.id))),
    }
}

/// Affine map `t = t0 + κ·c` from a chart axis coordinate to an edge parameter.
#[derive(Debug, Clone, Copy)]
struct AxisMap {
    edge: usize,
    t0: f64,
    kappa: f64,
}

impl AxisMap {
    fn t(&self, c: f64) -> f64 {
        self.t0 + self.kappa * c
    }
}

#[derive(Debug, Clone, Copy)]
enum ChartKind {
    /// `X = M(x − S)/ℓ`.
    Affine { m: Mat2 },
    /// `X = (R − |x − c|)/ℓ`, `Y = σR(θ − θ₀)/ℓ`.
    Polar { center: Point, radius: f64, theta0: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy)]
enum Layout {
    /// Bottom axis `Y = 0, X > 0` and left axis `X = 0, Y > 0`.
    Quadrant { bottom: AxisMap, left: AxisMap },
    /// Both edges on `Y = 0`: `left` for `X < 0`, `right` for `X > 0`.
    HalfPlane { left: AxisMap, right: AxisMap },
}

#[derive(Debug, Clone, Copy)]
struct CornerChart {
    origin: Point,
    ell: f64,
    /// Radius of the localizing cutoff; it equals 1 on half this radius.
    rho: f64,
    kind: ChartKind,
    layout: Layout,
}

impl CornerChart {
    fn map(&self, p: Point) -> (Point, Mat2, Hess2) {
        let l = self.ell;
        match self.kind {
            ChartKind::Affine { m } => {
                let d = sub(p, self.origin);
                let q = [(m[0][0] * d[0] + m[0][1] * d[1]) / l, (m[1][0] * d[0] + m[1][1] * d[1]) / l];
                let jm = [[m[0][0] / l, m[0][1] / l], [m[1][0] / l, m[1][1] / l]];
                (q, jm, [[0.0; 3]; 2])
            }
            ChartKind::Polar { center, radius, theta0, sigma } => {
                let d = sub(p, center);
                let (gr, hr) = radius_jet(d);
                let (gt, ht) = angle_jet(d);
                let a = sigma * radius / l;
                let q = [(radius - norm(d)) / l, a * angle_from(d, theta0)];
                let jm = [[-gr[0] / l, -gr[1] / l], [a * gt[0], a * gt[1]]];
                let hs = [[-hr[0] / l, -hr[1] / l, -hr[2] / l], [a * ht[0], a * ht[1], a * ht[2]]];
                (q, jm, hs)
            }
        }
    }

    fn bbox(&self) -> BBox {
        let [x, y] = self.origin;
        [x - self.rho, x + self.rho, y - self.rho, y + self.rho]
    }
}

fn corner_chart(domain: &DomainSpec, corner: &CornerSpec, ell: f64) -> Result<CornerChart> {
    let ein = domain.edge(corner.incoming_edge)?;
    let eout = domain.edge(corner.outgoing_edge)?;
    let s = corner.position;
    let lin = edge_length(ein)?;
    let lout = edge_length(eout)?;
    let a = unit(eout.curve.eval(0.0).d1);
    let b0 = ein.curve.eval(1.0).d1;
    let b = unit([-b0[0], -b0[1]]);
    match (&ein.curve, &eout.curve) {
        (Curve::Segment { .. }, Curve::Segment { .. }) => {
            if (corner.angle - core::f64::consts::PI).abs() < 1e-9 {
                let m = [[a[0], a[1]], [-a[1], a[0]]];
                let left = AxisMap { edge: ein.id, t0: 1.0, kappa: ell / lin };
                let right = AxisMap { edge: eout.id, t0: 0.0, kappa: ell / lout };
                Ok(CornerChart {
                    origin: s,
                    ell,
                    rho: ell,
                    kind: ChartKind::Affine { m },
                    layout: Layout::HalfPlane { left, right },
                })
            } else {
                let det = cross(a, b);
                let m = [[b[1] / det, -b[0] / det], [-a[1] / det, a[0] / det]];
                let op = (1.0 / (1.0 - dot(a, b).abs())).sqrt();
                let bottom = AxisMap { edge: eout.id, t0: 0.0, kappa: ell / lout };
                let left = AxisMap { edge: ein.id, t0: 1.0, kappa: -ell / lin };
                Ok(CornerChart {
                    origin: s,
                    ell,
                    rho: ell / op,
                    kind: ChartKind::Affine { m },
                    layout: Layout::Quadrant { bottom, left },
                })
            }
        }
        (Curve::Arc { .. }, Curve::Segment { .. }) | (Curve::Segment { .. }, Curve::Arc { .. }) => {
            let arc_is_in = matches!(ein.curve, Curve::Arc { .. });
            let (arc, seg, seg_len) = if arc_is_in { (ein, eout, lout) } else { (eout, ein, lin) };
            let Curve::Arc { center, radius, theta0, theta1 } = arc.curve else { unreachable!() };
            if theta1 <= theta0 {
                return Err(Error::Partition(format!("corner {} lies on a concave arc", corner.id)));
            }
            let radial_dir = unit(sub(center, s));
            let seg_dir = if arc_is_in { a } else { b };
            if cross(radial_dir, seg_dir).abs() > 1e-9 || dot(radial_dir, seg_dir) <= 0.0 {
                return Err(Error::Partition(format!(
                    "corner {} joins an arc and a segment that is not an inward radius",
                    corner.id
                )));
            }
            let arc_dir = if arc_is_in { b } else { a };
            let th_s = if arc_is_in { theta1 } else { theta0 };
            let e_th = [-th_s.sin(), th_s.cos()];
            let sigma = dot(arc_dir, e_th).signum();
            let seg_map = if arc_is_in {
                AxisMap { edge: seg.id, t0: 0.0, kappa: ell / seg_len }
            } else {
                AxisMap { edge: seg.id, t0: 1.0, kappa: -ell / seg_len }
            };
            let arc_map = AxisMap {
                edge: arc.id,
                t0: if arc_is_in { 1.0 } else { 0.0 },
                kappa: sigma * ell / (radius * (theta1 - theta0)),
            };
            Ok(CornerChart {
                origin: s,
                ell,
                rho: ell / 1.5,
                kind: ChartKind::Polar { center, radius, theta0: th_s, sigma },
                layout: Layout::Quadrant { bottom: seg_map, left: arc_map },
            })
        }
        _ => Err(Error::Partition(format!("corner {} has an unsupported edge pair", corner.id))),
    }
}

/// Chart-axis data for a Dirichlet edge: `g(t(c))` under the data cutoff.
fn dirichlet_axis(g: EdgeData, m: AxisMap, support: (f64, f64)) -> Data1d {
    let k = m.kappa;
    let mut d = Data1d::new(support, move |c| {
        let chi = ramp_down(c.abs(), DATA_PLATEAU, DATA_SUPPORT);
        let sg = c.signum();
        let chi = [chi[0], sg * chi[1], chi[2]];
        let v = g(m.t(c));
        let f = [v[0], k * v[1], k * k * v[2]];
        [f[0] * chi[0], f[1] * chi[0] + f[0] * chi[1], f[2] * chi[0] + 2.0 * f[1] * chi[1] + f[0] * chi[2]]
    });
    d.kinks.push(0.0);
    d
}

/// Normalized oblique coefficient and data scale along one chart axis.
///
/// `bottom` selects the `−∂_Y + β'∂_X` form, otherwise `−∂_X + α'∂_Y`.
fn oblique_coeffs(
    chart: &CornerChart,
    edge: &EdgeSpec,
    m: AxisMap,
    bottom: bool,
    c: f64,
) -> (f64, f64) {
    let t = m.t(c);
    let x = edge.curve.point(t);
    let (_, jm, _) = chart.map(x);
    let (mu, _) = oblique_direction(edge, t);
    let p = jm[0][0] * mu[0] + jm[0][1] * mu[1];
    let q = jm[1][0] * mu[0] + jm[1][1] * mu[1];
    if bottom {
        (-p / q, -1.0 / q)
    } else {
        (-q / p, -1.0 / p)
    }
}

fn oblique_axis(
    chart: CornerChart,
    edge: EdgeSpec,
    g: EdgeData,
    m: AxisMap,
    bottom: bool,
    support: (f64, f64),
) -> Result<(f64, Data1d)> {
    let (coef, _) = oblique_coeffs(&chart, &edge, m, bottom, 0.0);
    for i in 1..=20 {
        let c = i as f64 / 20.0;
        let c = if support.1 <= 0.0 { -c } else { c };
        let (b, _) = oblique_coeffs(&chart, &edge, m, bottom, c);
        if (b - coef).abs() > 1e-9 * (1.0 + coef.abs()) {
            return Err(Error::Partition(format!(
                "oblique coefficient on edge {} varies near a corner ({coef} vs {b})",
                edge.id
            )));
        }
    }
    let k = m.kappa;
    let mut d = Data1d::new(support, move |c| {
        let chi = ramp_down(c.abs(), DATA_PLATEAU, DATA_SUPPORT);
        let chi = [chi[0], c.signum() * chi[1]];
        let v = g(m.t(c));
        let s0 = oblique_coeffs(&chart, &edge, m, bottom, c).1;
        let sp = oblique_coeffs(&chart, &edge, m, bottom, c + FD_STEP).1;
        let sm = oblique_coeffs(&chart, &edge, m, bottom, c - FD_STEP).1;
        let ds = (sp - sm) / (2.0 * FD_STEP);
        let f = [v[0] * s0, k * v[1] * s0 + v[0] * ds];
        [f[0] * chi[0], f[1] * chi[0] + f[0] * chi[1], f64::NAN]
    });
    d.kinks.push(0.0);
    Ok((coef, d))
}

fn axis_condition(
    domain: &DomainSpec,
    data: &[EdgeData],
    chart: &CornerChart,
    m: AxisMap,
    bottom: bool,
    support: (f64, f64),
) -> Result<EdgeCondition> {
    let idx = edge_index(domain, m.edge)?;
    let edge = &domain.edges[idx];
    let g = data[idx].clone();
    Ok(match edge.bc {
        BcKind::Dirichlet => EdgeCondition::Dirichlet(dirichlet_axis(g, m, support)),
        BcKind::Robin => {
            let (coef, d) = oblique_axis(*chart, edge.clone(), g, m, bottom, support)?;
            EdgeCondition::Oblique { coef, data: d }
        }
    })
}

fn edge_index(domain: &DomainSpec, id: usize) -> Result<usize> {
    domain
        .edges
        .iter()
        .position(|e| e.id == id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown edge {id}")))
}

fn corner_field(domain: &DomainSpec, data: &[EdgeData], chart: CornerChart) -> Result<ExtensionField> {
    let pos = (0.0, DATA_SUPPORT);
    let neg = (-DATA_SUPPORT, 0.0);
    let w = match chart.layout {
        Layout::Quadrant { bottom, left } => {
            let b = axis_condition(domain, data, &chart, bottom, true, pos)?;
            let l = axis_condition(domain, data, &chart, left, false, pos)?;
            quadrant_extension(&b, &l)?
        }
        Layout::HalfPlane { left, right } => {
            let l = axis_condition(domain, data, &chart, left, true, neg)?;
            let r = axis_condition(domain, data, &chart, right, true, pos)?;
            halfplane_extension(&l, &r)?
        }
    };
    let pulled = w.pullback_chart(chart.bbox(), move |p| chart.map(p));
    let (o, rho) = (chart.origin, chart.rho);
    let eta = ExtensionField::from_fn(chart.bbox(), move |p| {
        let (v, g, h) = radial(p, o, 0.5 * rho, rho);
        Jet2 { v, g, h }
    });
    Ok(pulled.mul(&eta))
}

/// Arc-length and inward-distance coordinates of an edge, scaled by `1/δ`.
fn edge_chart(edge: &EdgeSpec, delta: f64) -> impl Fn(Point) -> (Point, Mat2, Hess2) + Send + Sync + 'static {
    let curve = edge.curve.clone();
    move |p| match &curve {
        Curve::Segment { a, b } => {
            let tau = unit(sub(*b, *a));
            let nu = [tau[1], -tau[0]];
            let d = sub(p, *a);
            let q = [dot(d, tau) / delta, -dot(d, nu) / delta];
            let jm = [[tau[0] / delta, tau[1] / delta], [-nu[0] / delta, -nu[1] / delta]];
            (q, jm, [[0.0; 3]; 2])
        }
        Curve::Arc { center, radius, theta0, theta1 } => {
            let dir = (theta1 - theta0).signum();
            let d = sub(p, *center);
            if (norm(d) - radius).abs() >= delta {
                return ([0.0, 2.0], [[0.0; 2]; 2], [[0.0; 3]; 2]);
            }
            let mid = 0.5 * (theta0 + theta1);
            let th = mid + angle_from(d, mid) - theta0;
            // Outward normal is +e_r for counterclockwise arcs.
            let o = dir;
            let (gr, hr) = radius_jet(d);
            let (gt, ht) = angle_jet(d);
            let a = radius * dir / delta;
            let b = -o / delta;
            let q = [a * th, o * (radius - norm(d)) / delta];
            let jm = [[a * gt[0], a * gt[1]], [b * gr[0], b * gr[1]]];
            let hs = [[a * ht[0], a * ht[1], a * ht[2]], [b * hr[0], b * hr[1], b * hr[2]]];
            (q, jm, hs)
        }
        Curve::Custom(_) => unreachable!(),
    }
}

fn edge_bbox(edge: &EdgeSpec, pad: f64) -> BBox {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for i in 0..=64 {
        let p = edge.curve.point(i as f64 / 64.0);
        b = [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])];
    }
    [b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad]
}

/// Residual `g − B F` along the edge as `[r, dr/dt]`.
fn residual(edge: &EdgeSpec, g: &EdgeData, f: &ExtensionField, t: f64) -> [f64; 2] {
    let c = edge.curve.eval(t);
    let j = f.jet(c.p);
    let gv = g(t);
    let hv = |v: Point, w: Point| j.h[0] * v[0] * w[0] + j.h[1] * (v[0] * w[1] + v[1] * w[0]) + j.h[2] * v[1] * w[1];
    match edge.bc {
        BcKind::Dirichlet => [gv[0] - j.v, gv[1] - j.directional(c.d1)],
        BcKind::Robin => {
            let (mu, dmu) = oblique_direction(edge, t);
            [gv[0] - j.directional(mu), gv[1] - j.directional(dmu) - hv(mu, c.d1)]
        }
    }
}

struct EdgeScales {
    delta: f64,
    rho_start: f64,
    rho_end: f64,
}

fn edge_field(edge: &EdgeSpec, g: &EdgeData, f: &ExtensionField, sc: &EdgeScales) -> Result<ExtensionField> {
    let len = edge_length(edge)?;
    let delta = sc.delta;
    let (r0, r1) = (sc.rho_start, sc.rho_end);
    let end_cut = move |s: f64| {
        let a = step((s - 0.4 * r0) / (0.1 * r0));
        let b = step((len - s - 0.4 * r1) / (0.1 * r1));
        [a[0] * b[0], a[1] / (0.1 * r0) * b[0] - a[0] * b[1] / (0.1 * r1)]
    };
    let (edge_c, g_c, f_c) = (edge.clone(), g.clone(), f.clone());
    let raw = Data1d::new((0.0, len), move |s| {
        let chi = end_cut(s);
        if chi[0] == 0.0 && chi[1] == 0.0 {
            return [0.0; 3];
        }
        let r = residual(&edge_c, &g_c, &f_c, s / len);
        let r = [r[0], r[1] / len];
        [r[0] * chi[0], r[1] * chi[0] + r[0] * chi[1], f64::NAN]
    });
    let h = r0.min(r1) / RESIDUAL_SAMPLES;
    let tab = raw.tabulate(h).scale_arg(delta);
    let local = match edge.bc {
        BcKind::Dirichlet => {
            let s = tab.support;
            ExtensionField::separable(s, (-0.75, 0.75), move |x| tab.eval(x), |y| PlateauCutoff.eval(y))
        }
        BcKind::Robin => t_x_extend(&tab).scale(delta),
    };
    Ok(local.pullback_chart(edge_bbox(edge, delta), edge_chart(edge, delta)))
}

/// Builds `w` with `w = g` on Dirichlet edges and `∂_ν w + β∂_τ w = g` on
/// Robin edges of `domain`. `data` is aligned with `domain.edges`.
///
/// Supported corners join two segments, or an arc with a segment along its
/// inward radius. Robin coefficients must be constant near each corner after
/// straightening.
pub fn polygon_inverse_trace(domain: &DomainSpec, data: &[EdgeData]) -> Result<ExtensionField> {
    if data.len() != domain.edges.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} edge data, got {}",
            domain.edges.len(),
            data.len()
        )));
    }
    let mut lengths = Vec::with_capacity(domain.edges.len());
    for e in &domain.edges {
        lengths.push(edge_length(e)?);
    }
    let mut charts = Vec::with_capacity(domain.corners.len());
    for c in &domain.corners {
        let li = lengths[edge_index(domain, c.incoming_edge)?];
        let lo = lengths[edge_index(domain, c.outgoing_edge)?];
        let mut m = li.min(lo).min(domain.corner_separation(c.id)?);
        for e in [c.incoming_edge, c.outgoing_edge] {
            if let Curve::Arc { radius, .. } = domain.edge(e)?.curve {
                m = m.min(radius);
            }
        }
        charts.push(corner_chart(domain, c, SCALE_FRACTION * m)?);
    }
    let mut fields = Vec::with_capacity(charts.len() + domain.edges.len());
    for ch in &charts {
        fields.push(corner_field(domain, data, *ch)?);
    }
    let corners = ExtensionField::sum(&fields);
    for (k, e) in domain.edges.iter().enumerate() {
        let start = domain.corners.iter().position(|c| c.outgoing_edge == e.id);
        let end = domain.corners.iter().position(|c| c.incoming_edge == e.id);
        let (Some(a), Some(b)) = (start, end) else {
            return Err(Error::InvalidArgument(format!("edge {} lacks an end corner", e.id)));
        };
        let sa = domain.corners[a].angle.sin().abs().min(1.0);
        let sb = domain.corners[b].angle.sin().abs().min(1.0);
        let sa = if (domain.corners[a].angle - core::f64::consts::PI).abs() < 1e-9 { 1.0 } else { sa };
        let sb = if (domain.corners[b].angle - core::f64::consts::PI).abs() < 1e-9 { 1.0 } else { sb };
        let (r0, r1) = (charts[a].rho, charts[b].rho);
        let sc = EdgeScales { delta: 0.1 * r0.min(r1) * sa.min(sb), rho_start: r0, rho_end: r1 };
        fields.push(edge_field(e, &data[k], &corners, &sc)?);
    }
    Ok(ExtensionField::sum(&fields))
}
