//! `dimdoe`: derive dimensionless models and build experimental designs
//! from JSON problem files.

mod derive;
mod design;
mod evaluate;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dimdoe", version, about = "Dimensional analysis and experiment design")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive dimensionless groups; exits 2 when responses are excluded.
    Derive(derive::DeriveArgs),
    /// Build an optimal, uniform or robust design.
    Design(design::DesignArgs),
    /// I-efficiency of an existing factor-space design.
    Efficiency(evaluate::EfficiencyArgs),
    /// Factor settings that realize given π values.
    Backsolve(evaluate::BacksolveArgs),
}

/// Model flags shared by every command that builds response models.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Polynomial order for models without one in the problem file.
    #[arg(long, default_value_t = dimdoe::pipeline::DEFAULT_ORDER)]
    pub order: usize,

    /// Comma-separated orders, one per response; overrides the file.
    #[arg(long, value_delimiter = ',')]
    pub orders_per_response: Option<Vec<usize>>,

    /// Monte Carlo sample size for moment matrices.
    #[arg(long, default_value_t = dimdoe::criterion::DEFAULT_MOMENT_SAMPLES)]
    pub samples: usize,

    /// RNG seed; generated and reported when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ModelArgs {
    /// The seed to use and whether it was supplied.
    pub fn resolve_seed(&self) -> (u64, bool) {
        match self.seed {
            Some(s) => (s, true),
            None => (rand::random::<u32>() as u64, false),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Optimal,
    Uniform,
    Robust,
}

pub fn problem_path(p: &PathBuf) -> anyhow::Result<dimdoe::problem::LoadedProblem> {
    dimdoe::problem::ProblemFile::load(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Derive(a) => derive::run(&a),
        Command::Design(a) => design::run(&a).map(|_| 0),
        Command::Efficiency(a) => evaluate::efficiency(&a).map(|_| 0),
        Command::Backsolve(a) => evaluate::backsolve(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
