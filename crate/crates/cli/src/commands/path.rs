use halfdisk_core::continuation::{
    bump_seeds, follow_path_with, parity_count, ridge_amplitude_path, CurvePath, FollowOptions, Termination,
};
use halfdisk_core::minimal_disk::{Embedding, HalfDiskMesh, TransversalField, Vec3};
use halfdisk_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::commands::minimal::newton_options;
use crate::config::{CurveDesc, MetricDesc};
use crate::error::{CliError, CliResult};
use crate::output::{LinePlot, Series};
use crate::Context;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathDesc {
    Constant {
        #[serde(default)]
        curve: CurveDesc,
    },
    Translation {
        #[serde(default)]
        curve: CurveDesc,
        direction: Vec3,
    },
    /// Fixed semicircle in `y = offset` under a ridge metric whose amplitude
    /// runs from `a0` to `a1`.
    RidgeAmplitude {
        #[serde(default = "default_offset")]
        offset: f64,
        #[serde(default = "default_a0")]
        a0: f64,
        #[serde(default = "default_a1")]
        a1: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
}

fn default_offset() -> f64 {
    0.05
}

fn default_a0() -> f64 {
    1.5
}

fn default_a1() -> f64 {
    0.8
}

fn default_width() -> f64 {
    0.25
}

impl Default for PathDesc {
    fn default() -> Self {
        PathDesc::RidgeAmplitude { offset: default_offset(), a0: default_a0(), a1: default_a1(), width: default_width() }
    }
}

impl PathDesc {
    fn path(&self) -> CliResult<CurvePath> {
        Ok(match self {
            PathDesc::Constant { curve } => CurvePath::constant(curve.curve()?),
            PathDesc::Translation { curve, direction } => {
                if direction[2] != 0.0 {
                    return Err(CliError::schema("translations must stay parallel to the plane z = 0"));
                }
                CurvePath::translation(curve.curve()?, *direction)
            }
            PathDesc::RidgeAmplitude { offset, a0, a1, width } => {
                if !(*width > 0.0) {
                    return Err(CliError::schema("ridge width must be positive"));
                }
                ridge_amplitude_path(*offset, *a0, *a1, *width)
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsDesc {
    /// Bump heights `c` for seeds `(x, c(1 − x² − y²), y)`.
    #[serde(default = "default_heights")]
    pub heights: Vec<f64>,
    /// Extra bump seeds with heights drawn uniformly from `[−amplitude, amplitude]`.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_heights() -> Vec<f64> {
    vec![-0.6, -0.4, -0.25, -0.1, 0.0, 0.1, 0.25, 0.4, 0.6]
}

fn default_amplitude() -> f64 {
    0.6
}

impl Default for SeedsDesc {
    fn default() -> Self {
        SeedsDesc { heights: default_heights(), random: 0, amplitude: default_amplitude() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinueProblem {
    #[serde(default)]
    pub path: PathDesc,
    /// Base metric for paths without a metric family.
    #[serde(default)]
    pub metric: MetricDesc,
    pub transversal: Option<Vec3>,
    #[serde(default)]
    pub seeds: SeedsDesc,
    pub steps: Option<usize>,
}

#[derive(Debug, Serialize)]
struct BranchRow {
    branch: usize,
    seed: usize,
    t: f64,
    residual: f64,
    sigma_min: f64,
    sigma_max: f64,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct FoldJson {
    t_lo: f64,
    t_hi: f64,
    sigma_lo: f64,
    sigma_mid: Option<f64>,
    sigma_start: f64,
}

#[derive(Debug, Serialize)]
struct BranchJson {
    branch: usize,
    seed: usize,
    termination: &'static str,
    t_end: f64,
    fold: Option<FoldJson>,
    lost_at: Option<f64>,
    continuity: f64,
}

#[derive(Debug, Serialize)]
struct Endpoint {
    t: f64,
    solutions: Option<usize>,
    parity: Option<u8>,
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct Report {
    path: String,
    n: usize,
    steps: usize,
    seeds: usize,
    lipschitz: f64,
    branches: Vec<BranchJson>,
    endpoints: Vec<Endpoint>,
}

pub fn run(ctx: &mut Context, n: Option<usize>, steps: Option<usize>) -> CliResult<()> {
    let problem: ContinueProblem = ctx.config.problem()?;
    let n = match n {
        Some(n) => n,
        None => ctx.config.single_size(12)?,
    };
    let steps = steps.or(problem.steps).unwrap_or(10);
    let path = problem.path.path()?;
    let base = path.metric(0.0, &problem.metric.metric()?);
    let mesh = HalfDiskMesh::new(n)?;
    let mut heights = problem.seeds.heights.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let a = problem.seeds.amplitude.abs();
    heights.extend((0..problem.seeds.random).map(|_| if a > 0.0 { rng.gen_range(-a..=a) } else { 0.0 }));
    if heights.is_empty() {
        return Err(CliError::schema("the seed set is empty"));
    }
    let seeds = bump_seeds(&mesh, &heights);
    let p = TransversalField::constant(&Embedding::flat(mesh.clone()), &base, problem.transversal.unwrap_or([0.0, 1.0, 0.0]));
    let tol = &ctx.config.tolerances;
    let mut opts = FollowOptions { newton: newton_options(tol)?, ..FollowOptions::default() };
    if let Some(d) = tol.dedup {
        opts.dedup = d;
    }
    if let Some(b) = tol.bracket {
        opts.bracket = b;
    }
    let branches = follow_path_with(&path, &base, &p, &seeds, steps, opts)?;

    let mut rows = Vec::new();
    let mut json = Vec::with_capacity(branches.len());
    for (k, b) in branches.iter().enumerate() {
        for e in &b.entries {
            rows.push(BranchRow {
                branch: k,
                seed: b.seed,
                t: e.t,
                residual: e.residual,
                sigma_min: e.sigma_min,
                sigma_max: e.sigma_max,
                iterations: e.iterations,
            });
        }
        let (termination, lost_at) = match b.termination {
            Termination::Completed => ("completed", None),
            Termination::Fold(_) => ("fold", None),
            Termination::Lost { t } => ("lost", Some(t)),
        };
        json.push(BranchJson {
            branch: k,
            seed: b.seed,
            termination,
            t_end: b.last().t,
            fold: b.fold().map(|f| FoldJson {
                t_lo: f.t_lo,
                t_hi: f.t_hi,
                sigma_lo: f.sigma_lo,
                sigma_mid: f.sigma_mid,
                sigma_start: f.sigma_start,
            }),
            lost_at,
            continuity: b.continuity,
        });
    }

    let mut pool: Vec<Embedding> = seeds.clone();
    pool.extend(branches.iter().map(|b| b.last().embedding.clone()));
    let mut endpoints = Vec::with_capacity(2);
    for t in [0.0, 1.0] {
        endpoints.push(match parity_count(&path.curve(t), &path.metric(t, &base), &p, &pool) {
            Ok(r) => Endpoint { t, solutions: Some(r.census.count()), parity: Some(r.parity), note: None },
            Err(CoreError::NotRegular(msg)) => Endpoint { t, solutions: None, parity: None, note: Some(msg) },
            Err(CoreError::NoSeedConverged) => {
                Endpoint { t, solutions: Some(0), parity: None, note: Some("no seed converged".into()) }
            }
            Err(e) => return Err(e.into()),
        });
    }

    let plot = LinePlot {
        title: format!("{} branches", path.name),
        x_label: "t".into(),
        y_label: "sigma_min".into(),
        log_x: false,
        log_y: true,
        series: branches
            .iter()
            .enumerate()
            .map(|(k, b)| Series {
                label: format!("branch {k}"),
                points: b.entries.iter().map(|e| (e.t, e.sigma_min)).collect(),
            })
            .collect(),
    };
    let report = Report {
        path: path.name.clone(),
        n,
        steps,
        seeds: seeds.len(),
        lipschitz: path.lipschitz,
        branches: json,
        endpoints,
    };
    ctx.sink.csv("branches.csv", &rows)?;
    ctx.sink.json("parity.json", &report)?;
    ctx.sink.svg("branches.svg", &plot)
}
