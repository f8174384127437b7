//! JSON run configuration and descriptor types.
//!
//! Every object rejects unknown keys. Descriptors that depend on the
//! subcommand (`problem`) are kept as raw JSON in [`RunConfig`] and decoded
//! by the subcommand.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use halfdisk_core::domain::{make_half_disk_with, make_sector, BcKind, Curve, DomainSpec, EdgeField, EdgeSpec, Point};
use halfdisk_core::extension_ops::{Data1d, EdgeCondition};
use halfdisk_core::minimal_disk::{BoundaryCurve, MetricField, Vec3};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub domain: Option<DomainDesc>,
    pub problem: Option<Value>,
    pub n: Option<Sizes>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Decodes `problem` into the subcommand's descriptor; a missing
    /// problem gives the descriptor's default.
    pub fn problem<T: DeserializeOwned + Default>(&self) -> CliResult<T> {
        match &self.problem {
            None => Ok(T::default()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::schema(format!("problem: {e}"))),
        }
    }

    pub fn sizes(&self) -> Option<Vec<usize>> {
        self.n.as_ref().map(|s| match s {
            Sizes::One(n) => vec![*n],
            Sizes::Many(v) => v.clone(),
        })
    }

    pub fn single_size(&self, default: usize) -> CliResult<usize> {
        match self.sizes() {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(v) => Err(CliError::schema(format!("expected one grid size, got {v:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub dedup: Option<f64>,
    pub kernel_tol: Option<f64>,
    pub bracket: Option<f64>,
}

/// Scalar edge coefficient: a constant or polynomial coefficients in the
/// edge parameter.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Const(f64),
    Poly(Vec<f64>),
}

impl Coef {
    pub fn field(&self) -> EdgeField {
        match self {
            Coef::Const(c) => EdgeField::Const(*c),
            Coef::Poly(p) => EdgeField::Poly(p.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcDesc {
    Dirichlet,
    Robin,
}

impl From<BcDesc> for BcKind {
    fn from(b: BcDesc) -> Self {
        match b {
            BcDesc::Dirichlet => BcKind::Dirichlet,
            BcDesc::Robin => BcKind::Robin,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DomainDesc {
    Name(String),
    Builtin(BuiltinDomain),
    Edges(EdgesDomain),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinDomain {
    HalfDisk {
        beta: Option<Coef>,
        d: Option<Coef>,
    },
    Sector {
        omega: f64,
        bc_left: Option<BcDesc>,
        bc_right: Option<BcDesc>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgesDomain {
    pub name: Option<String>,
    pub edges: Vec<EdgeDesc>,
    #[serde(default)]
    pub corners: Vec<CornerDesc>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Arc,
    Segment,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDesc {
    pub id: Option<usize>,
    pub kind: EdgeKind,
    pub params: Value,
    pub bc: BcDesc,
    pub beta: Option<Coef>,
    pub d: Option<Coef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentParams {
    a: Point,
    b: Point,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcParams {
    center: Point,
    radius: f64,
    theta0: f64,
    theta1: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerDesc {
    pub id: usize,
    #[serde(default)]
    pub artificial: bool,
}

/// Built domain plus the sector angle when the domain is a built-in sector.
pub struct BuiltDomain {
    pub spec: DomainSpec,
    pub sector_angle: Option<f64>,
}

impl DomainDesc {
    pub fn build(&self) -> CliResult<BuiltDomain> {
        match self {
            DomainDesc::Name(n) => match n.as_str() {
                "half_disk" => Ok(BuiltDomain { spec: make_half_disk_with(EdgeField::zero(), EdgeField::zero()), sector_angle: None }),
                "sector" => {
                    let om = 1.5 * PI;
                    Ok(BuiltDomain { spec: make_sector(om, BcKind::Dirichlet, BcKind::Dirichlet)?, sector_angle: Some(om) })
                }
                other => Err(CliError::schema(format!("unknown domain {other:?}; expected half_disk or sector"))),
            },
            DomainDesc::Builtin(BuiltinDomain::HalfDisk { beta, d }) => {
                let f = |c: &Option<Coef>| c.as_ref().map(Coef::field).unwrap_or_else(EdgeField::zero);
                Ok(BuiltDomain { spec: make_half_disk_with(f(beta), f(d)), sector_angle: None })
            }
            DomainDesc::Builtin(BuiltinDomain::Sector { omega, bc_left, bc_right }) => {
                let l = bc_left.unwrap_or(BcDesc::Dirichlet).into();
                let r = bc_right.unwrap_or(BcDesc::Dirichlet).into();
                Ok(BuiltDomain { spec: make_sector(*omega, l, r)?, sector_angle: Some(*omega) })
            }
            DomainDesc::Edges(e) => {
                let mut edges = Vec::with_capacity(e.edges.len());
                for (k, ed) in e.edges.iter().enumerate() {
                    let curve = match ed.kind {
                        EdgeKind::Segment => {
                            let p: SegmentParams = serde_json::from_value(ed.params.clone())
                                .map_err(|err| CliError::schema(format!("edge {k} params: {err}")))?;
                            Curve::Segment { a: p.a, b: p.b }
                        }
                        EdgeKind::Arc => {
                            let p: ArcParams = serde_json::from_value(ed.params.clone())
                                .map_err(|err| CliError::schema(format!("edge {k} params: {err}")))?;
                            Curve::Arc { center: p.center, radius: p.radius, theta0: p.theta0, theta1: p.theta1 }
                        }
                    };
                    let f = |c: &Option<Coef>| c.as_ref().map(Coef::field).unwrap_or_else(EdgeField::zero);
                    edges.push(EdgeSpec::new(ed.id.unwrap_or(k), curve, ed.bc.into()).with_coefficients(f(&ed.beta), f(&ed.d)));
                }
                let mut spec = DomainSpec::from_edges(e.name.as_deref().unwrap_or("custom"), edges)?;
                for c in &e.corners {
                    let corner = spec
                        .corners
                        .iter_mut()
                        .find(|k| k.id == c.id)
                        .ok_or_else(|| CliError::schema(format!("no corner with id {}", c.id)))?;
                    corner.artificial = c.artificial;
                }
                Ok(BuiltDomain { spec, sector_angle: None })
            }
        }
    }
}

/// Polynomial `Σ c x^i y^j` given as `[[i, j, c], ...]`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(transparent)]
pub struct Poly2(pub Vec<(u32, u32, f64)>);

impl Poly2 {
    pub fn eval(&self, p: Point) -> f64 {
        self.0.iter().map(|&(i, j, c)| c * p[0].powi(i as i32) * p[1].powi(j as i32)).sum()
    }
}

/// `Σ c_k x^k` times a plateau cutoff equal to 1 on `|x| ≤ plateau` and 0
/// beyond `radius`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauDesc {
    pub coeffs: Vec<f64>,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_plateau() -> f64 {
    0.4
}

fn default_radius() -> f64 {
    1.0
}

impl PlateauDesc {
    pub fn data(&self) -> CliResult<Data1d> {
        if !(self.plateau > 0.0 && self.radius > self.plateau) {
            return Err(CliError::schema(format!("plateau data needs 0 < plateau < radius, got {} and {}", self.plateau, self.radius)));
        }
        Ok(Data1d::plateau_poly(&self.coeffs, self.plateau, self.radius))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "bc", rename_all = "snake_case", deny_unknown_fields)]
pub enum EdgeConditionDesc {
    Dirichlet { data: PlateauDesc },
    Oblique { coef: f64, data: PlateauDesc },
}

impl EdgeConditionDesc {
    pub fn condition(&self) -> CliResult<EdgeCondition> {
        Ok(match self {
            EdgeConditionDesc::Dirichlet { data } => EdgeCondition::Dirichlet(data.data()?),
            EdgeConditionDesc::Oblique { coef, data } => EdgeCondition::Oblique { coef: *coef, data: data.data()? },
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricDesc {
    #[default]
    Euclidean,
    /// `(1 + a(1 − |x − c|²/R²)⁴) δ` inside the ball.
    Bump { amplitude: f64, center: Vec3, radius: f64 },
    /// `(1 + a exp(−y²/2w²)) δ`.
    Ridge { amplitude: f64, width: f64 },
}

impl MetricDesc {
    pub fn metric(&self) -> CliResult<MetricField> {
        match *self {
            MetricDesc::Euclidean => Ok(MetricField::euclidean()),
            MetricDesc::Bump { amplitude, center, radius } => {
                if !(radius > 0.0 && amplitude > -1.0) {
                    return Err(CliError::schema("bump metric needs radius > 0 and amplitude > −1"));
                }
                Ok(MetricField::bump(amplitude, center, radius))
            }
            MetricDesc::Ridge { amplitude, width } => {
                if !(width > 0.0 && amplitude > -1.0) {
                    return Err(CliError::schema("ridge metric needs width > 0 and amplitude > −1"));
                }
                Ok(MetricField::ridge(amplitude, width))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveDesc {
    /// `center + radius (cos θ, 0, sin θ)`.
    Semicircle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Vec3,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for CurveDesc {
    fn default() -> Self {
        CurveDesc::Semicircle { radius: 1.0, center: [0.0; 3] }
    }
}

impl CurveDesc {
    pub fn curve(&self) -> CliResult<BoundaryCurve> {
        match *self {
            CurveDesc::Semicircle { radius, center } => {
                if !(radius > 0.0) {
                    return Err(CliError::schema("semicircle radius must be positive"));
                }
                Ok(BoundaryCurve::semicircle(radius, center))
            }
        }
    }
}
