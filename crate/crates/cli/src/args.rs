use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "halfdisk", version, about = "Corner analysis, mixed elliptic solves and minimal half disks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for all random sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the inner parallel loops.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Singular exponents per corner, resonance flags and index prediction.
    Spectrum {
        /// Built-in domain name (`half_disk` or `sector`).
        #[arg(long)]
        domain: Option<String>,
        /// Weight exponent of the weighted Sobolev space.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Solve one mixed boundary value problem.
    SolveBvp {
        /// `manufactured_mixed`, `sector_singular` or `custom`.
        #[arg(long)]
        problem: Option<String>,
        /// Grid size.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Refinement study against an exact solution.
    Convergence {
        /// `manufactured_mixed`, `sector_singular` or `custom`.
        #[arg(long)]
        problem: Option<String>,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
    },
    /// Sample an inverse-trace extension on a grid.
    ExtendTrace {
        /// `t_x`, `t_y`, `quadrant` or `halfplane`.
        #[arg(long)]
        operator: Option<String>,
    },
    /// Corner deformation statistics.
    Deform {
        /// Cutoff radius of the corner deformation.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Newton solve for a minimal half disk.
    Minimal {
        /// Mesh size.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Path following and parity counts.
    Continue {
        /// Mesh size.
        #[arg(long)]
        n: Option<usize>,
        /// Uniform steps in t before bisection.
        #[arg(long)]
        steps: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::SolveBvp { .. } => "solve-bvp",
            Command::Convergence { .. } => "convergence",
            Command::ExtendTrace { .. } => "extend-trace",
            Command::Deform { .. } => "deform",
            Command::Minimal { .. } => "minimal",
            Command::Continue { .. } => "continue",
        }
    }
}
