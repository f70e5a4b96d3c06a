//! Command-line driver for the Bethe strip experiments.
//!
//! [`run`] is the whole program minus process exit, so tests can drive it
//! in-process.

pub mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Outcome, RunError};
pub use config::{parse_config_text, Command, ConfigError, ExperimentConfig, Grid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bethe-strip", version, about = "Green's functions, densities of states and C_E spectra on the Bethe strip")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Closed-form free Green's functions and A_E on a grid.
    FreeProfile(RunArgs),
    /// Population-dynamics density of states and E Tr|G|^2.
    DosScan(RunArgs),
    /// Stabilization of E Tr|G|^2 down an eta schedule.
    AcIndicator(RunArgs),
    /// Gaps of K C_E - I and of the tensor operator.
    GapScan(RunArgs),
    /// Eigenvalues of C_E and the triangularity check of its matrix.
    CeSpectrum(RunArgs),
    /// Recursion against direct sparse solves on finite trees.
    Crosscheck(RunArgs),
}

impl CliCommand {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            CliCommand::FreeProfile(a) => (Command::FreeProfile, a),
            CliCommand::DosScan(a) => (Command::DosScan, a),
            CliCommand::AcIndicator(a) => (Command::AcIndicator, a),
            CliCommand::GapScan(a) => (Command::GapScan, a),
            CliCommand::CeSpectrum(a) => (Command::CeSpectrum, a),
            CliCommand::Crosscheck(a) => (Command::Crosscheck, a),
        }
    }
}

/// Values stay strings here; [`ExperimentConfig::from_pairs`] does all parsing.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// key=value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Connectivity
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Strip width
    #[arg(long = "m")]
    pub m: Option<String>,
    /// On-site matrix, `diag:a1,a2,...`
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// goe | diag:uniform | diag:gauss | diag:bernoulli | point:<path-or-inline>
    #[arg(long, allow_hyphen_values = true)]
    pub ensemble: Option<String>,
    /// Energy grid `lo:hi:count`
    #[arg(long = "E-grid", allow_hyphen_values = true)]
    pub e_grid: Option<String>,
    /// Comma-separated eta levels
    #[arg(long = "eta-schedule")]
    pub eta_schedule: Option<String>,
    #[arg(long)]
    pub pool: Option<String>,
    #[arg(long)]
    pub sweeps: Option<String>,
    #[arg(long)]
    pub burnin: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub degree: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Seed of the direct solves in `crosscheck` (defaults to --seed)
    #[arg(long = "ed-seed")]
    pub ed_seed: Option<String>,
    /// Work units per sweep; fixed by config so results ignore thread count
    #[arg(long)]
    pub chunks: Option<String>,
    #[arg(long, env = "BETHE_STRIP_THREADS")]
    pub workers: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

impl RunArgs {
    fn flag_pairs(&self) -> BTreeMap<String, String> {
        let flags = [
            ("K", &self.k),
            ("m", &self.m),
            ("A", &self.a),
            ("lambda", &self.lambda),
            ("ensemble", &self.ensemble),
            ("E-grid", &self.e_grid),
            ("eta-schedule", &self.eta_schedule),
            ("pool", &self.pool),
            ("sweeps", &self.sweeps),
            ("burnin", &self.burnin),
            ("samples", &self.samples),
            ("depth", &self.depth),
            ("degree", &self.degree),
            ("seed", &self.seed),
            ("ed-seed", &self.ed_seed),
            ("chunks", &self.chunks),
            ("workers", &self.workers),
            ("out", &self.out),
        ];
        flags.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }

    /// File entries overlaid by flags.
    pub fn resolve(&self, command: Command) -> Result<ExperimentConfig, ConfigError> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        pairs.extend(self.flag_pairs());
        ExperimentConfig::from_pairs(command, &pairs)
    }
}

/// Runs a resolved config and writes its outputs plus `<out>.manifest.json`.
pub fn run_config(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| ConfigError(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let outcome = pool.install(|| execute(config))?;
    let manifest = output::manifest(
        config,
        &outcome.columns,
        &outcome.artifacts,
        &outcome.warnings,
        pool.current_num_threads(),
        started.elapsed(),
    );
    output::write_all(&outcome.artifacts)?;
    output::write_all(&[output::Artifact::json(output::sibling(&config.out, "manifest.json"), &manifest)])?;
    Ok(outcome)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (command, args) = cli.command.split();
    let result = args.resolve(command).map_err(RunError::from).and_then(|config| run_config(&config));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.verified {
                EXIT_OK
            } else {
                eprintln!("verification failed");
                EXIT_VERIFICATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
