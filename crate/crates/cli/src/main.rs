//! `ocsrbench`: generate damaged corpora, run recognizers, score and report.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ocsr_bench::evaluate::ReportFormat;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "ocsrbench", version, about = "OCSR robustness benchmark")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Configuration file (default: ./ocsrbench.toml when present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for noise and distortion draws.
    #[arg(long, global = true)]
    corpus_seed: Option<u64>,
    /// Concurrent adapter processes.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Per-image timeout for every adapter, overriding config and
    /// OCSR_TIMEOUT_SECS.
    #[arg(long, global = true)]
    timeout_secs: Option<f64>,
    /// Restrict to these subsets (repeatable). `gen` always builds base.
    #[arg(long, global = true, value_name = "SUBSET")]
    only: Vec<String>,
    /// Accept damage parameters outside the default grid.
    #[arg(long, global = true)]
    allow_off_grid: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the molfiles and build every damaged subset.
    Gen,
    /// Run one adapter over subsets of the corpus.
    Run {
        /// Adapter name from the config.
        #[arg(long)]
        adapter: String,
    },
    /// Run the configured agreement ensemble over subsets.
    Ensemble,
    /// Score every results file and write reports.
    Eval {
        #[arg(long, value_enum, default_values_t = [Format::Csv, Format::Json, Format::Markdown])]
        format: Vec<Format>,
    },
    /// Write reports from saved scores or from a table of percentages.
    Report {
        #[arg(long, value_enum, default_values_t = [Format::Markdown])]
        format: Vec<Format>,
        /// Tab- or comma-separated rate table (adapters by subsets, cells
        /// like `82.2%`) used instead of saved scores.
        #[arg(long)]
        rates: Option<PathBuf>,
        /// Output directory (default: report_dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Markdown,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
            Format::Markdown => ReportFormat::Markdown,
        }
    }
}

fn load_config(g: &GlobalOpts) -> anyhow::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None if std::path::Path::new("ocsrbench.toml").is_file() => RunConfig::load("ocsrbench.toml".as_ref())?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.corpus_seed {
        cfg.corpus_seed = s;
    }
    if let Some(p) = g.parallelism {
        anyhow::ensure!(p > 0, "--parallelism must be at least 1");
        cfg.parallelism = p;
    }
    cfg.allow_off_grid |= g.allow_off_grid;
    for a in &mut cfg.adapters {
        a.timeout_secs = ocsr_bench::harness::resolve_timeout(a.timeout_secs, g.timeout_secs)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli.global).and_then(|cfg| {
        let only = &cli.global.only;
        match cli.command {
            Command::Gen => commands::gen(&cfg, only),
            Command::Run { adapter } => commands::run(&cfg, &adapter, only),
            Command::Ensemble => commands::ensemble(&cfg, only),
            Command::Eval { format } => commands::eval(&cfg, only, &to_formats(&format)),
            Command::Report { format, rates, out } => {
                commands::report(&cfg, rates.as_deref(), out.as_deref(), &to_formats(&format))
            }
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<commands::UsageError>() {
                Some(_) => ExitCode::from(2),
                None => ExitCode::FAILURE,
            }
        }
    }
}

fn to_formats(f: &[Format]) -> Vec<ReportFormat> {
    let mut out: Vec<ReportFormat> = Vec::new();
    for &x in f {
        if !out.contains(&x.into()) {
            out.push(x.into());
        }
    }
    out
}
