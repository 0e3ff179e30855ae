//! `mmhbm`: file-based experiments for sparse MMV regression.
//!
//! Exit status is 0 on success, 1 on a runtime failure and 2 on a usage
//! error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Environment variable naming the directory that default output paths are
/// created under.
pub const OUT_ROOT_ENV: &str = "MMHBM_OUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "mmhbm", version, about = "Sparse MMV regression, MM/HBM solvers and posterior mode exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command", content = "args")]
pub enum Command {
    /// Write a synthetic problem directory.
    Generate(GenerateArgs),
    /// Solve one regularized problem.
    Solve(SolveArgs),
    /// Run the Gibbs sampler and an MM solve from every sample.
    Explore(ExploreArgs),
    /// Repeat a previous run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["example", "mmv"])))]
pub struct GenerateArgs {
    /// Built-in toy problem.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: Option<u8>,
    /// JSON simulation spec: {n, d, t, m, active: [{group, waveform}], noise_level, rho}.
    #[arg(long)]
    pub mmv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: $MMHBM_OUT_ROOT/<name>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Reweighted l_{2,1/2} from uniform weights.
    Mm,
    /// Alternating MAP over (X, gamma) with the matching hyper-prior.
    FullMap,
    /// Plain group lasso.
    L21,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("reg").required(true).args(["lambda_ratio", "lambda"])))]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Regularization as a fraction of lambda_max.
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    /// Absolute regularization.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = SolveMode::Mm)]
    pub mode: SolveMode,
    /// Inner duality-gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// Outer sup-norm tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tau: f64,
    /// Outer iteration limit.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Output directory [default: $MMHBM_OUT_ROOT/<problem>-solve-<mode>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExploreArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub lambda_ratio: f64,
    /// Retained samples.
    #[arg(long = "K", default_value_t = 1000)]
    pub k: usize,
    /// Burn-in samples.
    #[arg(long = "K0", default_value_t = 1000)]
    pub k0: usize,
    /// Single-component sweeps per sample.
    #[arg(long, default_value_t = 10)]
    pub ksc: usize,
    /// Slice-sampling steps per coefficient.
    #[arg(long, default_value_t = 10)]
    pub kss: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Workers for the MM phase (0: all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Relative support threshold.
    #[arg(long, default_value_t = mmhbm::explorer::DEFAULT_TAU_SUPP)]
    pub tau_supp: f64,
    /// Objective histogram bins.
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Also write every retained X sample as CSV.
    #[arg(long)]
    pub dump_samples: bool,
    /// Output directory [default: $MMHBM_OUT_ROOT/<problem>-explore-<seed>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
