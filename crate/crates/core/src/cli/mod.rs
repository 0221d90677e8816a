//! The `tabula` command line: argument parsing, exit codes and dispatch.
//!
//! Commands write to the `out`/`err` sinks handed to [`run`], so the whole
//! surface is testable without spawning a process.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod analyze;
pub mod config;
pub mod export;
mod ingest;
mod pipeline;
mod query;

pub use config::PipelineConfig;
pub use export::{read_export, ExportLine, ExportRecord, HistogramEntry, RunSummary};

use crate::synth::SynthError;

pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_VERSION"), " (seeds: sha256 -> chacha8)");

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Data = 2,
    External = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    External(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::Data(_) | CliError::Io { .. } => ExitStatus::Data,
            CliError::External(_) => ExitStatus::External,
        }
    }

    pub(crate) fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Config(_) => CliError::Usage(e.to_string()),
            SynthError::Command(_) => CliError::External(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Writing to stdout/stderr sinks.
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io("output", e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "tabula", version = BUILD_ID, about = "Linearized-table analysis and table task synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate table files, write a corpus manifest and print corpus stats.
    Ingest(IngestArgs),
    /// Write a seeded demo corpus (CSV files plus manifest).
    DemoCorpus(DemoCorpusArgs),
    /// Build task instances into a line-delimited export file.
    Synthesize(SynthesizeArgs),
    /// Run the pass-rate filter over an export file.
    Filter(FilterArgs),
    /// Lag-profile analysis of a column model or sampled tables.
    MiAnalyze(MiAnalyzeArgs),
    /// Run a query against a directory of tables.
    Sql(SqlArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Table files (.csv, .md) or directories to scan recursively.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Where to write the manifest.
    #[arg(long, short = 'm')]
    pub manifest: PathBuf,
    /// Tag attached to every entry.
    #[arg(long = "tag")]
    pub tags: Vec<String>,
    /// Print stats as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DemoCorpusArgs {
    /// Output directory; created if missing.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[arg(long, default_value_t = 150)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Pipeline config (TOML). Flags override its values.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Corpus manifests; replaces the config's list.
    #[arg(long = "manifest")]
    pub manifests: Vec<PathBuf>,
    /// Use a generated demo corpus of this many tables instead of manifests.
    #[arg(long)]
    pub demo_corpus: Option<usize>,
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Export file; `-` for stdout.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Dimension weights as `retrieval,multi-hop,grounding`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Involved-cell bucket: small, medium or large.
    #[arg(long)]
    pub bucket: Option<String>,
    /// Token budget B; contexts land in [0.9 B, 1.1 B].
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub min_tables: Option<usize>,
    #[arg(long)]
    pub max_tables: Option<usize>,
    /// Render variant; repeat to draw among several.
    #[arg(long = "variant")]
    pub variants: Vec<String>,
    #[arg(long)]
    pub noise_rate: Option<f64>,
    /// Question rewriter command line.
    #[arg(long)]
    pub rewriter: Option<String>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Export file to filter; defaults to the config's export path.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    /// Built-in stub solver: oracle, wrong or coin.
    #[arg(long, conflicts_with = "solver_cmd")]
    pub solver: Option<String>,
    /// External solver command line (JSON request on stdin, answer on stdout).
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// Attempts per task.
    #[arg(long, short = 'n')]
    pub attempts: Option<u32>,
    /// Per-attempt timeout for external solvers, seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Retained records (export format).
    #[arg(long)]
    pub retained: Option<PathBuf>,
    /// Per-task pass-rate records.
    #[arg(long)]
    pub audit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalysisMode {
    Analytic,
    Empirical,
}

#[derive(Debug, Args)]
pub struct MiAnalyzeArgs {
    #[arg(long, value_enum)]
    pub mode: AnalysisMode,
    /// Column model file (TOML).
    #[arg(long, conflicts_with_all = ["random_model", "disjoint"])]
    pub model: Option<PathBuf>,
    /// Seeded random model as `m,k,seed`.
    #[arg(long)]
    pub random_model: Option<String>,
    /// Point-mass model with `m` disjoint columns.
    #[arg(long, conflicts_with = "random_model")]
    pub disjoint: Option<usize>,
    /// Table rows n.
    #[arg(long, default_value_t = 200)]
    pub rows: usize,
    /// Sample tables for empirical mode (.csv or .md, all the same shape).
    #[arg(long = "sample")]
    pub samples: Vec<PathBuf>,
    /// Empirical mode: draw this many tables from the model instead.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest lag; defaults to (n - 1) m.
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Dependency threshold; defaults to half the same-column MI.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub min_pairs: Option<u64>,
    /// Write the lag profile CSV here (`-` for stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SqlArgs {
    /// Directory of .csv/.md tables, one relation per file.
    #[arg(long, short = 's')]
    pub store: Option<PathBuf>,
    /// Extra table files.
    #[arg(long = "table")]
    pub tables: Vec<PathBuf>,
    /// Print the parsed query as JSON instead of running it.
    #[arg(long)]
    pub explain: bool,
    /// Also run the reference evaluator and report AGREE or DISAGREE.
    #[arg(long)]
    pub oracle: bool,
    /// The query; `-` reads stdin.
    pub query: String,
}

/// Parse `args` (program name first) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let text = e.render().to_string();
            return match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{text}");
                    if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand {
                        ExitStatus::Usage.code()
                    } else {
                        ExitStatus::Success.code()
                    }
                }
                _ => {
                    let _ = write!(err, "{text}");
                    ExitStatus::Usage.code()
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(status) => status.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.status().code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    match command {
        Command::Ingest(a) => ingest::run(&a, out, err),
        Command::DemoCorpus(a) => ingest::demo(&a, out),
        Command::Synthesize(a) => pipeline::synthesize(&a, out, err),
        Command::Filter(a) => pipeline::filter(&a, out, err),
        Command::MiAnalyze(a) => analyze::run(&a, out),
        Command::Sql(a) => query::run(&a, out, err),
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    let code = run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code)
}
