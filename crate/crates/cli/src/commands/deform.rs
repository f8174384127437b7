use std::f64::consts::PI;

use halfdisk_core::deformation::{corner_deformation, pushforward_domain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::DomainDesc;
use crate::error::{CliError, CliResult};
use crate::Context;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformProblem {
    /// One matrix per corner; defaults to `diag(1/2, 1)` at the first
    /// corner and the identity elsewhere.
    pub matrices: Option<Vec<[[f64; 2]; 2]>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_samples() -> usize {
    10_000
}

impl Default for DeformProblem {
    fn default() -> Self {
        DeformProblem { matrices: None, epsilon: default_epsilon(), samples: default_samples() }
    }
}

#[derive(Debug, Serialize)]
struct Sample {
    corner: usize,
    x: f64,
    y: f64,
    phi_x: f64,
    phi_y: f64,
    det: f64,
}

#[derive(Debug, Serialize)]
struct CornerAngles {
    id: usize,
    before: f64,
    after: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    domain: String,
    epsilon: f64,
    samples: usize,
    det_bound: f64,
    min_det: f64,
    moved_outside: usize,
    max_inverse_error: f64,
    corners: Vec<CornerAngles>,
}

pub fn run(ctx: &mut Context, epsilon: Option<f64>) -> CliResult<()> {
    let problem: DeformProblem = ctx.config.problem()?;
    let d = ctx.config.domain.clone().unwrap_or(DomainDesc::Name("half_disk".into())).build()?.spec;
    let epsilon = epsilon.unwrap_or(problem.epsilon);
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let matrices = problem.matrices.clone().unwrap_or_else(|| {
        (0..d.corners.len()).map(|k| if k == 0 { [[0.5, 0.0], [0.0, 1.0]] } else { id }).collect()
    });
    let phi = corner_deformation(&d, &matrices, epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::with_capacity(problem.samples);
    let (mut min_det, mut moved, mut inv_err) = (f64::INFINITY, 0usize, 0.0f64);
    for _ in 0..problem.samples {
        let c = rng.gen_range(0..d.corners.len());
        let s = d.corners[c].position;
        let r = 2.5 * epsilon * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(0.0..2.0 * PI);
        let p = [s[0] + r * th.cos(), s[1] + r * th.sin()];
        let q = phi.apply(p);
        let det = phi.jacobian_det(p);
        min_det = min_det.min(det);
        let far = d.corners.iter().all(|k| (p[0] - k.position[0]).hypot(p[1] - k.position[1]) >= 2.0 * epsilon);
        if far && q != p {
            moved += 1;
        }
        let back = phi.inverse(q).map_err(|e| CliError::Numerical(format!("inverse at {p:?}: {e}")))?;
        inv_err = inv_err.max((back[0] - p[0]).abs().max((back[1] - p[1]).abs()));
        rows.push(Sample { corner: d.corners[c].id, x: p[0], y: p[1], phi_x: q[0], phi_y: q[1], det });
    }
    let pushed = pushforward_domain(&d, &phi);
    let corners = d
        .corners
        .iter()
        .zip(&pushed.corners)
        .map(|(a, b)| CornerAngles { id: a.id, before: a.angle, after: b.angle })
        .collect();
    let report = Report {
        domain: d.name.clone(),
        epsilon,
        samples: problem.samples,
        det_bound: phi.det_bound(),
        min_det,
        moved_outside: moved,
        max_inverse_error: inv_err,
        corners,
    };
    ctx.sink.csv("deform_samples.csv", &rows)?;
    ctx.sink.json("deform.json", &report)
}
