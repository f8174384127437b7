use halfdisk_core::corner_analysis::{check_resonance, predict_index, singular_exponents, IndexSetting};
use halfdisk_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::config::DomainDesc;
use crate::error::CliResult;
use crate::Context;

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    #[default]
    Full,
    Pinned,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumProblem {
    pub sigma: Option<f64>,
    /// Defaults to `(−(2 + σ), 0)`.
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub setting: Setting,
}

#[derive(Debug, Serialize)]
struct CornerRow {
    id: usize,
    position: [f64; 2],
    angle: f64,
    artificial: bool,
    lambdas: Vec<f64>,
    m: Vec<i64>,
    log: Vec<bool>,
    resonance: bool,
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    domain: String,
    sigma: f64,
    window: (f64, f64),
    corners: Vec<CornerRow>,
    index: Option<i64>,
    index_note: Option<String>,
}

pub fn run(ctx: &mut Context, domain: Option<&str>, sigma: Option<f64>) -> CliResult<()> {
    let problem: SpectrumProblem = ctx.config.problem()?;
    let desc = match domain {
        Some(d) => DomainDesc::Name(d.into()),
        None => ctx.config.domain.clone().unwrap_or(DomainDesc::Name("half_disk".into())),
    };
    let d = desc.build()?.spec;
    let sigma = sigma.or(problem.sigma).unwrap_or(0.5);
    let window = problem.window.unwrap_or((-(2.0 + sigma), 0.0));
    let resonance = check_resonance(&d, sigma)?;
    let mut corners = Vec::with_capacity(d.corners.len());
    for c in &d.corners {
        let s = singular_exponents(&d, c.id, window)?;
        corners.push(CornerRow {
            id: c.id,
            position: c.position,
            angle: c.angle,
            artificial: c.artificial,
            lambdas: s.lambdas(),
            m: s.terms.iter().map(|t| t.m).collect(),
            log: s.terms.iter().map(|t| t.is_log).collect(),
            resonance: resonance.iter().any(|&(id, hit)| id == c.id && hit),
        });
    }
    let setting = match problem.setting {
        Setting::Full => IndexSetting::Full,
        Setting::Pinned => IndexSetting::Pinned,
    };
    let (index, index_note) = match predict_index(&d, sigma, setting) {
        Ok(i) => (Some(i), None),
        Err(CoreError::NotPredicted(msg)) => (None, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    let report = SpectrumReport { domain: d.name.clone(), sigma, window, corners, index, index_note };
    ctx.sink.json("spectrum.json", &report)
}
