//! The `apc` command line: `gen`, `analyze`, `solve` and `bench`.

mod commands;
pub mod config;
pub mod load;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;

pub use commands::{cmd_analyze, cmd_bench, cmd_gen, cmd_solve, GenRequest};
pub use config::{RunConfig, SynthSpec};
pub use load::{fixture_manifest, load_system, resolve_fixture, FIXTURES_ENV};

#[derive(Debug, Parser)]
#[command(name = "apc", version, about = "Distributed solvers for consistent linear systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded Gaussian system: matrix, solution and manifest.
    Gen(GenArgs),
    /// Spectral summary and optimal parameters of every method.
    Analyze(CommonArgs),
    /// Run one method and write its error trace.
    Solve(CommonArgs),
    /// Tune and run a set of methods, optionally over several worker counts.
    Bench(CommonArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Unknowns.
    pub n: usize,
    /// Equations.
    #[arg(value_name = "N")]
    pub rows: usize,
    #[arg(allow_negative_numbers = true)]
    pub mean: f64,
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Matrix Market file holding A.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Right-hand side b (Matrix Market array).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Known solution x*; b = A x* when --rhs is absent.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Fixture name resolved under $APC_FIXTURES.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Synthetic Gaussian system `n,N,mean,seed`.
    #[arg(long, value_name = "n,N,mean,seed", allow_hyphen_values = true)]
    pub synth: Option<String>,
    /// Seed of x* when b has to be synthesized.
    #[arg(long)]
    pub solution_seed: Option<u64>,
    /// Worker count.
    #[arg(long)]
    pub m: Option<usize>,
    /// Worker counts for `bench`; non-divisors of N are skipped.
    #[arg(long, value_delimiter = ',')]
    pub m_sweep: Option<Vec<usize>>,
    /// Method(s): apc|dgd|dnag|dhbm|admm|cimmino|pdhbm|consensus.
    #[arg(long = "method", value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Tune parameters (the default when none are given).
    #[arg(long)]
    pub optimal: bool,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Run over the threaded master/worker simulation.
    #[arg(long)]
    pub simulate: bool,
    /// Shuffle rows with this seed before partitioning.
    #[arg(long)]
    pub permute_seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write simulated traffic as JSON lines (implies --simulate).
    #[arg(long)]
    pub log_messages: bool,
    /// Start the master at zero.
    #[arg(long)]
    pub zero_init: bool,
    #[arg(long, hide = true)]
    pub admm_dual: bool,
    /// JSON file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    /// Merges the optional config file under the flags.
    pub fn resolve(&self, command: &str) -> Result<RunConfig> {
        let flags = RunConfig {
            command: command.to_string(),
            input: self.input.clone(),
            rhs: self.rhs.clone(),
            solution: self.solution.clone(),
            fixture: self.fixture.clone(),
            synth: self.synth.as_deref().map(str::parse).transpose()?,
            solution_seed: self.solution_seed,
            m: self.m,
            m_sweep: self.m_sweep.clone(),
            methods: self.methods.clone(),
            gamma: self.gamma,
            eta: self.eta,
            alpha: self.alpha,
            beta: self.beta,
            xi: self.xi,
            nu: self.nu,
            optimal: self.optimal,
            tol: self.tol,
            max_iters: self.max_iters,
            simulate: self.simulate || self.log_messages,
            permute_seed: self.permute_seed,
            out: self.out.clone(),
            log_messages: self.log_messages,
            zero_init: self.zero_init,
            admm_dual: self.admm_dual,
        };
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let mut merged = base.overlay(&flags);
        merged.simulate |= merged.log_messages;
        Ok(merged)
    }
}

/// Runs a parsed command line, writing human-readable output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Gen(g) => cmd_gen(
            &GenRequest {
                n: g.n,
                rows: g.rows,
                mean: g.mean,
                seed: g.seed,
                out: g.out,
            },
            stdout,
        ),
        Command::Analyze(a) => cmd_analyze(&a.resolve("analyze")?, stdout),
        Command::Solve(a) => cmd_solve(&a.resolve("solve")?, stdout),
        Command::Bench(a) => cmd_bench(&a.resolve("bench")?, stdout),
    }
}
