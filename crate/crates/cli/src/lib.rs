//! Command-line front end for `halfdisk-core`.
//!
//! Each subcommand reads an optional JSON [`config::RunConfig`], applies
//! flag overrides, runs one experiment and writes JSON, CSV and SVG
//! artifacts into the output directory. Artifacts carry no timestamps, so
//! a fixed configuration and seed reproduce them byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use args::{Cli, Command};
use config::RunConfig;
use error::{CliError, CliResult};
use output::Sink;

pub const DEFAULT_OUT: &str = "halfdisk-out";

pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub sink: Sink,
}

/// Runs one parsed invocation and returns the written artifact paths.
pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let config = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &config.subcommand {
        if s != cli.command.name() {
            return Err(CliError::schema(format!("config is for {s:?}, invoked {:?}", cli.command.name())));
        }
    }
    let out = cli.common.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
    let seed = cli.common.seed.or(config.seed).unwrap_or(0);
    let threads = match cli.common.threads {
        Some(0) => return Err(CliError::schema("--threads must be positive")),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut ctx = Context { config, seed, sink: Sink::new(&out)? };
    pool.install(|| dispatch(&cli.command, &mut ctx))?;
    Ok(ctx.sink.written)
}

fn dispatch(cmd: &Command, ctx: &mut Context) -> CliResult<()> {
    match cmd {
        Command::Spectrum { domain, sigma } => commands::spectrum::run(ctx, domain.as_deref(), *sigma),
        Command::SolveBvp { problem, n } => commands::bvp::solve(ctx, problem.as_deref(), *n),
        Command::Convergence { problem, n } => commands::bvp::convergence(ctx, problem.as_deref(), n.clone()),
        Command::ExtendTrace { operator } => commands::extend::run(ctx, operator.as_deref()),
        Command::Deform { epsilon } => commands::deform::run(ctx, *epsilon),
        Command::Minimal { n } => commands::minimal::run(ctx, *n),
        Command::Continue { n, steps } => commands::path::run(ctx, *n, *steps),
    }
}

/// Replaces the `key` entry of the configured problem object with `value`,
/// creating the object when the config has none.
pub(crate) fn override_problem(config: &mut RunConfig, key: &str, value: &str) {
    let mut obj = match config.problem.take() {
        Some(serde_json::Value::Object(m)) => m,
        _ => serde_json::Map::new(),
    };
    if obj.get(key).and_then(|v| v.as_str()) != Some(value) {
        obj.retain(|_, _| false);
    }
    obj.insert(key.into(), serde_json::Value::String(value.into()));
    config.problem = Some(serde_json::Value::Object(obj));
}
