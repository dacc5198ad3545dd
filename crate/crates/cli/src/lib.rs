//! Command-line front end: design optimization, estimation, design audits,
//! exhaustive oracle certification and Monte-Carlo strategy comparison.
//!
//! Every subcommand produces a [`Report`] serialized as JSON with sorted keys,
//! or, for `design` and `simulate`, optionally as CSV.

mod commands;
mod error;
mod inputs;
mod report;
mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use report::{Report, SCHEMA_VERSION};
pub use validate::{validate_inputs, Diagnostic, Severity};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MINIMAX_SAMPLER_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(name = "minimax-sampler", version, about = "Minimax sampling designs for bounded finite-population totals")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Drop zero-radius units and carry their known values as a constant.
    #[arg(long, global = true)]
    pub strip_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Water-fill inclusion probabilities for an expected-size budget.
    Design {
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long)]
        budget: f64,
    },
    /// Midpoint-differenced estimate of the total from an observed sample.
    Estimate {
        /// Bounds CSV; rows with a `y` value form the sample unless `--sample` is given.
        #[arg(long)]
        bounds: PathBuf,
        /// File listing sampled units (ids or 1-based indices, comma or newline separated).
        #[arg(long)]
        sample: Option<PathBuf>,
        /// A `design` report to take `pi_star` from.
        #[arg(long, conflicts_with = "pi")]
        pi_from: Option<PathBuf>,
        /// CSV with a `pi` column (and optional `id` column).
        #[arg(long)]
        pi: Option<PathBuf>,
    },
    /// Inclusion-probability audit and sharpness verdict for a design.
    Audit {
        #[arg(long)]
        bounds: PathBuf,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = minimax_sampler::oracle::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Exhaustive certification of one design, or of a random instance suite.
    Oracle {
        #[arg(long, required_unless_present = "suite")]
        bounds: Option<PathBuf>,
        #[command(flatten)]
        design: DesignArgs,
        /// Run this many random instances instead of a given design.
        #[arg(long)]
        suite: Option<usize>,
        /// Population sizes drawn uniformly from 2..=MAX_UNITS in suite mode.
        #[arg(long, default_value_t = 6)]
        suite_max_units: usize,
        /// Random-center difference estimators to test per instance.
        #[arg(long, default_value_t = 3)]
        challengers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = minimax_sampler::oracle::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Lower the vertex enumeration cap (at most 20).
        #[arg(long)]
        max_units: Option<usize>,
        /// Lower the design/prior support cap (at most 2^20).
        #[arg(long)]
        max_support: Option<usize>,
    },
    /// Monte-Carlo MSE of the minimax strategy and baselines.
    Simulate {
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long)]
        budget: f64,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// minimax, uniform-poisson, srswor, minimax-plain-ht or all; repeatable.
        #[arg(long, default_values_t = vec!["all".to_string()])]
        strategy: Vec<String>,
        /// CSV of outcome vectors, one per row, columns in unit order.
        #[arg(long)]
        y_file: Option<PathBuf>,
        /// Run replicates on the calling thread only.
        #[arg(long)]
        serial: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignKind {
    Poisson,
    Srswor,
    Enumerated,
}

#[derive(Debug, Clone, Args, Default)]
pub struct DesignArgs {
    #[arg(long = "design", value_enum)]
    pub kind: Option<DesignKind>,
    /// SRSWOR sample size.
    #[arg(long)]
    pub size: Option<usize>,
    /// SRSWOR population size; must match the bounds file.
    #[arg(long)]
    pub of: Option<usize>,
    /// Enumerated design JSON file.
    #[arg(long)]
    pub design_file: Option<PathBuf>,
    /// Poisson probabilities from a `design` report.
    #[arg(long = "design-pi-from")]
    pub pi_from: Option<PathBuf>,
    /// Poisson probabilities from a CSV with a `pi` column.
    #[arg(long = "design-pi")]
    pub pi: Option<PathBuf>,
    /// Poisson design with the water-fill probabilities for this budget.
    #[arg(long = "design-budget")]
    pub budget: Option<f64>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Design { .. } => "design",
            Command::Estimate { .. } => "estimate",
            Command::Audit { .. } => "audit",
            Command::Oracle { .. } => "oracle",
            Command::Simulate { .. } => "simulate",
        }
    }
}

/// Result of [`run`]: the process exit code, the rendered output on
/// success, and diagnostics for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Option<Report>,
    pub rendered: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Validates inputs, runs the subcommand and renders its report.
///
/// Exit codes: 0 success, 1 validation error, 2 internal error.
pub fn run(config: &RunConfig) -> Outcome {
    with_thread_cap(|| run_inner(config))
}

fn run_inner(config: &RunConfig) -> Outcome {
    let diagnostics = validate_inputs(config);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Outcome {
            exit_code: 1,
            report: None,
            rendered: None,
            diagnostics,
        };
    }
    let warnings: Vec<String> = diagnostics.iter().map(Diagnostic::to_string).collect();
    let result = commands::execute(config, warnings).and_then(|report| {
        let rendered = report::render(&report, config)?;
        Ok((report, rendered))
    });
    match result {
        Ok((report, rendered)) => Outcome {
            exit_code: 0,
            report: Some(report),
            rendered: Some(rendered),
            diagnostics,
        },
        Err(err) => {
            let mut diagnostics = diagnostics;
            diagnostics.push(Diagnostic::error(err.code(), err.to_string()));
            Outcome {
                exit_code: err.exit_code(),
                report: None,
                rendered: None,
                diagnostics,
            }
        }
    }
}

fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
