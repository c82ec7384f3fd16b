use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod dataset;
mod fsutil;
mod merge;
mod run;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad command line or run config (exit 1).
    Config(anyhow::Error),
    /// Unreadable or invalid data, embeddings or parses (exit 2).
    Data(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

pub fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

#[derive(Parser)]
#[command(name = "probekit", version, about = "Probe frozen token representations")]
struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate probes.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Check, summarise and generate datasets.
    #[command(subcommand)]
    Dataset(dataset::DatasetCommand),
    /// Combine report files.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Run the provider × head grid of a run config.
    Run(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Run config (JSON).
    #[arg(short, long)]
    config: PathBuf,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid entries trained concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write each trained probe as a checkpoint.
    #[arg(long)]
    save_probes: bool,
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Merge every `*.report.json` below a directory into one CSV.
    Merge {
        dir: PathBuf,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the merged JSON report set instead of CSV.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Probe(ProbeCommand::Run(args)) => run::cmd_probe_run(&args),
        Command::Dataset(cmd) => dataset::cmd_dataset(cmd),
        Command::Report(ReportCommand::Merge { dir, out, json }) => merge::cmd_merge(&dir, out.as_deref(), json),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let e = match &f {
                Failure::Config(e) => e,
                Failure::Data(e) => e,
            };
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
