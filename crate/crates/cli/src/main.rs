//! `esid`: run scenarios, ingest case data, validate and export results,
//! and serve the HTTP API.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Settings};

#[derive(Debug, Parser)]
#[command(name = "esid", version, about = "Epidemiological scenario ensembles for districts")]
struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "ESID_STORE")]
    store: Option<PathBuf>,
    /// District graph JSON.
    #[arg(long, global = true, env = "ESID_GRAPH")]
    graph: Option<PathBuf>,
    /// TOML file with defaults for store, graph, bind and log.
    #[arg(long, global = true, env = "ESID_CONFIG")]
    config: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario ensemble.
    Run(RunArgs),
    /// Serve the HTTP API over the store.
    Serve(ServeArgs),
    /// Ingest surveillance case data (CSV) into the store.
    Ingest(IngestArgs),
    /// Check a result directory against the format.
    Validate {
        path: PathBuf,
    },
    /// Write the percentile series of one district and compartment.
    Export(ExportArgs),
    /// Search districts by name or id.
    Search {
        query: String,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario definition (JSON or TOML).
    pub scenario: PathBuf,
    /// Write the result directory here instead of recording a run in the store.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ensemble size.
    #[arg(long)]
    pub members: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address.
    #[arg(long, env = "ESID_BIND")]
    pub bind: Option<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV with header date,county_id,age_group,confirmed,deaths,recovered.
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Store run id or result directory.
    pub run: String,
    #[arg(long)]
    pub district: String,
    #[arg(long)]
    pub compartment: String,
    /// Age-group label or `total`.
    #[arg(long, default_value = "total")]
    pub group: String,
    /// `csv` or `json`.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

pub fn io_reason(e: &std::io::Error) -> String {
    if e.kind() == std::io::ErrorKind::NotFound {
        "file not found".into()
    } else {
        e.to_string()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                let body = serde_json::json!({ "error": e.message, "exit_code": e.code });
                println!("{body}");
            } else {
                eprintln!("esid: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let bind = match &cli.command {
        Command::Serve(a) => a.bind.clone(),
        _ => None,
    };
    let settings = Settings::resolve(file, cli.store, cli.graph, bind);
    init_logging(cli.verbose, settings.log.as_deref());
    log::debug!("settings: {settings:?}");
    let out = commands::Output { json: cli.json };
    match cli.command {
        Command::Run(args) => commands::run(&args, &settings, out),
        Command::Serve(_) => commands::serve(&settings),
        Command::Ingest(args) => commands::ingest(&args, &settings, out),
        Command::Validate { path } => commands::validate(&path, out),
        Command::Export(args) => commands::export(&args, &settings),
        Command::Search { query } => commands::search(&query, &settings, out),
    }
}

fn init_logging(verbose: u8, configured: Option<&str>) {
    let level = match verbose {
        0 => configured.unwrap_or("warn"),
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}
