use halfdisk_core::extension_ops::{
    halfplane_extension, quadrant_extension, t_x_extend, t_y_extend, EdgeCondition, ExtensionField,
};
use serde::{Deserialize, Serialize};

use crate::config::{EdgeConditionDesc, PlateauDesc};
use crate::error::{CliError, CliResult};
use crate::{override_problem, Context};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDesc {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub n: usize,
}

fn default_data() -> PlateauDesc {
    PlateauDesc { coeffs: vec![1.0, 0.5], plateau: 0.4, radius: 1.0 }
}

fn default_dirichlet() -> EdgeConditionDesc {
    EdgeConditionDesc::Dirichlet { data: default_data() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtendProblem {
    /// Zero trace on `y = 0` and `−∂_y w = g`.
    TX {
        #[serde(default = "default_data")]
        data: PlateauDesc,
        sample: Option<SampleDesc>,
    },
    /// Zero trace on `x = 0` and `−∂_x w = h`.
    TY {
        #[serde(default = "default_data")]
        data: PlateauDesc,
        sample: Option<SampleDesc>,
    },
    /// First quadrant with conditions on the bottom and left edges.
    Quadrant {
        #[serde(default = "default_dirichlet")]
        bottom: EdgeConditionDesc,
        #[serde(default = "default_dirichlet")]
        left: EdgeConditionDesc,
        sample: Option<SampleDesc>,
    },
    /// Upper half-plane with the boundary split at the origin.
    Halfplane {
        #[serde(default = "default_dirichlet")]
        left: EdgeConditionDesc,
        #[serde(default = "default_dirichlet")]
        right: EdgeConditionDesc,
        sample: Option<SampleDesc>,
    },
}

impl Default for ExtendProblem {
    fn default() -> Self {
        ExtendProblem::TX { data: default_data(), sample: None }
    }
}

#[derive(Debug, Serialize)]
struct Row {
    x: f64,
    y: f64,
    value: f64,
    dx: f64,
    dy: f64,
}

#[derive(Debug, Serialize)]
struct TraceCheck {
    edge: &'static str,
    condition: &'static str,
    max_defect: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    operator: &'static str,
    samples: usize,
    traces: Vec<TraceCheck>,
}

fn ramp(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    lo + (hi - lo) * k as f64 / (n - 1) as f64
}

fn edge_samples(lo: f64, hi: f64) -> Vec<f64> {
    (0..=100).map(|k| ramp(lo, hi, k, 101)).collect()
}

/// Largest defect of `bc` on `y = 0` over `xs`, oblique read as `−∂_y + c∂_x`.
fn bottom_defect(w: &ExtensionField, bc: &EdgeCondition, xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| {
            let j = w.jet([x, 0.0]);
            match bc {
                EdgeCondition::Dirichlet(g) => (j.v - g.value(x)).abs(),
                EdgeCondition::Oblique { coef, data } => (-j.g[1] + coef * j.g[0] - data.value(x)).abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn kind(bc: &EdgeCondition) -> &'static str {
    match bc {
        EdgeCondition::Dirichlet(_) => "dirichlet",
        EdgeCondition::Oblique { .. } => "oblique",
    }
}

pub fn run(ctx: &mut Context, operator: Option<&str>) -> CliResult<()> {
    if let Some(op) = operator {
        override_problem(&mut ctx.config, "operator", op);
    }
    let problem: ExtendProblem = ctx.config.problem()?;
    let (name, w, sample, traces) = match problem {
        ExtendProblem::TX { data, sample } => {
            let g = data.data()?;
            let w = t_x_extend(&g);
            let xs = edge_samples(-2.0, 2.0);
            let value = xs.iter().map(|&x| w.value([x, 0.0]).abs()).fold(0.0, f64::max);
            let deriv = xs.iter().map(|&x| (-w.jet([x, 0.0]).g[1] - g.value(x)).abs()).fold(0.0, f64::max);
            let t = vec![
                TraceCheck { edge: "y = 0", condition: "value", max_defect: value },
                TraceCheck { edge: "y = 0", condition: "-d/dy", max_defect: deriv },
            ];
            ("t_x", w, sample.unwrap_or(SampleDesc { x: (-1.5, 1.5), y: (-1.0, 1.0), n: 41 }), t)
        }
        ExtendProblem::TY { data, sample } => {
            let h = data.data()?;
            let w = t_y_extend(&h);
            let ys = edge_samples(-2.0, 2.0);
            let value = ys.iter().map(|&y| w.value([0.0, y]).abs()).fold(0.0, f64::max);
            let deriv = ys.iter().map(|&y| (-w.jet([0.0, y]).g[0] - h.value(y)).abs()).fold(0.0, f64::max);
            let t = vec![
                TraceCheck { edge: "x = 0", condition: "value", max_defect: value },
                TraceCheck { edge: "x = 0", condition: "-d/dx", max_defect: deriv },
            ];
            ("t_y", w, sample.unwrap_or(SampleDesc { x: (-1.0, 1.0), y: (-1.5, 1.5), n: 41 }), t)
        }
        ExtendProblem::Quadrant { bottom, left, sample } => {
            let (b, l) = (bottom.condition()?, left.condition()?);
            let w = quadrant_extension(&b, &l)?;
            let pos = edge_samples(0.0, 1.5);
            let t = vec![
                TraceCheck { edge: "bottom", condition: kind(&b), max_defect: bottom_defect(&w, &b, &pos) },
                TraceCheck { edge: "left", condition: kind(&l), max_defect: bottom_defect(&w.swap_xy(), &l, &pos) },
            ];
            ("quadrant", w, sample.unwrap_or(SampleDesc { x: (0.0, 1.5), y: (0.0, 1.5), n: 31 }), t)
        }
        ExtendProblem::Halfplane { left, right, sample } => {
            let (l, r) = (left.condition()?, right.condition()?);
            let w = halfplane_extension(&l, &r)?;
            let pos = edge_samples(0.0, 1.5);
            let neg: Vec<f64> = pos.iter().map(|x| -x).collect();
            let t = vec![
                TraceCheck { edge: "x < 0", condition: kind(&l), max_defect: bottom_defect(&w, &l, &neg) },
                TraceCheck { edge: "x > 0", condition: kind(&r), max_defect: bottom_defect(&w, &r, &pos) },
            ];
            ("halfplane", w, sample.unwrap_or(SampleDesc { x: (-1.5, 1.5), y: (0.0, 1.5), n: 41 }), t)
        }
    };
    if sample.n < 2 || !(sample.x.0 < sample.x.1) || !(sample.y.0 < sample.y.1) {
        return Err(CliError::schema("sample needs n ≥ 2 and increasing ranges"));
    }
    let mut rows = Vec::with_capacity(sample.n * sample.n);
    for j in 0..sample.n {
        for i in 0..sample.n {
            let p = [ramp(sample.x.0, sample.x.1, i, sample.n), ramp(sample.y.0, sample.y.1, j, sample.n)];
            let jet = w.jet(p);
            rows.push(Row { x: p[0], y: p[1], value: jet.v, dx: jet.g[0], dy: jet.g[1] });
        }
    }
    ctx.sink.csv("extension.csv", &rows)?;
    ctx.sink.json("trace_check.json", &Report { operator: name, samples: rows.len(), traces })
}
