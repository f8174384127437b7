use halfdisk_core::minimal_disk::{
    contact_angle_residual, jacobi_kernel_dim, mean_curvature_residual, newton_solve_with, singular_extremes,
    Embedding, HalfDiskMesh, NewtonOptions, TransversalField, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CurveDesc, MetricDesc, Tolerances};
use crate::error::{CliError, CliResult};
use crate::output::{LinePlot, Series};
use crate::Context;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDesc {
    /// Start from `(x, height·(1 − x² − y²), y)`.
    #[serde(default = "default_height")]
    pub height: f64,
    /// Uniform nodal noise of this size times `1 − x² − y²`, drawn from the seed.
    #[serde(default)]
    pub noise: f64,
}

fn default_height() -> f64 {
    0.3
}

impl Default for InitialDesc {
    fn default() -> Self {
        InitialDesc { height: default_height(), noise: 0.0 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalProblem {
    #[serde(default)]
    pub metric: MetricDesc,
    #[serde(default)]
    pub curve: CurveDesc,
    /// Constant transversal direction, normalized in the metric.
    pub transversal: Option<Vec3>,
    #[serde(default)]
    pub initial: InitialDesc,
}

pub(crate) fn newton_options(t: &Tolerances) -> CliResult<NewtonOptions> {
    let mut o = NewtonOptions::default();
    if let Some(tol) = t.newton_tol {
        if !(tol > 0.0) {
            return Err(CliError::schema("newton_tol must be positive"));
        }
        o.tol = tol;
    }
    if let Some(m) = t.max_iter {
        o.max_iter = m;
    }
    Ok(o)
}

pub(crate) fn start(mesh: &std::sync::Arc<HalfDiskMesh>, init: InitialDesc, seed: u64) -> Embedding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..mesh.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = Embedding::from_fn(mesh.clone(), |q| [q[0], init.height * (1.0 - q[0] * q[0] - q[1] * q[1]), q[1]]);
    for (k, v) in f.values.iter_mut().enumerate() {
        let q = mesh.grid.points[k];
        v[1] += init.noise * noise[k] * (1.0 - q[0] * q[0] - q[1] * q[1]).max(0.0);
    }
    f
}

#[derive(Debug, Serialize)]
struct HistoryRow {
    iteration: usize,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct NodeRow {
    node: usize,
    i: usize,
    j: usize,
    u: f64,
    v: f64,
    x: f64,
    y: f64,
    z: f64,
    mean_curvature: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    n: usize,
    metric: String,
    curve: String,
    iterations: usize,
    residual: f64,
    sigma_min: f64,
    sigma_max: f64,
    kernel_tol: f64,
    kernel_dim: usize,
    area: f64,
    max_mean_curvature: f64,
    max_contact_angle: f64,
}

pub fn run(ctx: &mut Context, n: Option<usize>) -> CliResult<()> {
    let problem: MinimalProblem = ctx.config.problem()?;
    let n = match n {
        Some(n) => n,
        None => ctx.config.single_size(16)?,
    };
    let metric = problem.metric.metric()?;
    let gamma = problem.curve.curve()?;
    gamma.validate(&metric)?;
    let mesh = HalfDiskMesh::new(n)?;
    let f0 = start(&mesh, problem.initial, ctx.seed);
    let p = TransversalField::constant(&f0, &metric, problem.transversal.unwrap_or([0.0, 1.0, 0.0]));
    let opts = newton_options(&ctx.config.tolerances)?;
    let out = newton_solve_with(&gamma, &metric, &p, &f0, opts)?;
    let f = &out.embedding;
    let (lo, hi) = singular_extremes(f, &metric, &p)?;
    let kernel_tol = ctx.config.tolerances.kernel_tol.unwrap_or(1e-8);
    let h = mean_curvature_residual(f, &metric, &p)?;
    let theta = contact_angle_residual(f, &metric, &p)?;
    let history: Vec<HistoryRow> =
        out.history.iter().enumerate().map(|(k, r)| HistoryRow { iteration: k, residual: *r }).collect();
    let nodes: Vec<NodeRow> = (0..mesh.len())
        .map(|k| {
            let (i, j) = mesh.grid.ij(k);
            let q = mesh.grid.points[k];
            let x = f.values[k];
            NodeRow { node: k, i, j, u: q[0], v: q[1], x: x[0], y: x[1], z: x[2], mean_curvature: h.values[k] }
        })
        .collect();
    let report = Report {
        n,
        metric: metric.name.clone(),
        curve: gamma.name.clone(),
        iterations: out.iterations,
        residual: *out.history.last().unwrap_or(&0.0),
        sigma_min: lo,
        sigma_max: hi,
        kernel_tol,
        kernel_dim: jacobi_kernel_dim(f, &metric, &p, kernel_tol)?,
        area: f.area(&metric),
        max_mean_curvature: h.max_abs(),
        max_contact_angle: theta.max_abs(),
    };
    let plot = LinePlot {
        title: "Newton residual".into(),
        x_label: "iteration".into(),
        y_label: "residual".into(),
        log_x: false,
        log_y: true,
        series: vec![Series { label: "max residual".into(), points: history.iter().map(|r| (r.iteration as f64, r.residual)).collect() }],
    };
    ctx.sink.csv("residuals.csv", &history)?;
    ctx.sink.csv("solution.csv", &nodes)?;
    ctx.sink.json("jacobi.json", &report)?;
    ctx.sink.svg("residuals.svg", &plot)
}
