//! `teukolsky`: reproducible runs of the spectral propagator, the time-domain integrator and the
//! radial/angular diagnostics. Exit codes: 0 success, 1 computation failure, 2 configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use commands::Method;
use config::Versioned;
use error::CliError;
use output::{Cache, OutputDir};

#[derive(Parser, Debug)]
#[command(name = "teukolsky", version, about = "Spectral and time-domain Teukolsky evolution on Kerr")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory; defaults to `teukolsky-out/<command>`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct Cached {
    #[command(flatten)]
    common: Common,
    /// Bypass the result cache (`$TEUKOLSKY_CACHE_DIR`, default `~/.cache/teukolsky`).
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve initial data to the configured times.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "spectral")]
        method: Method,
        /// Run both methods and write the discrepancy table (implies `--method both`).
        #[arg(long)]
        compare: bool,
    },
    /// Scan the Wronskian for zeros in the lower half plane.
    ScanWronskian(Cached),
    /// Classify the radial potential and check the region estimates over a sweep.
    Regions(Cached),
    /// Angular eigenvalues and the fitted eigenvalue-bound constant.
    Angular(Cached),
    /// Left and right Jost solutions of one mode.
    Jost(Cached),
    /// Columns of the Green's function of one mode.
    Green(Cached),
}

fn out_dir(common: &Common, name: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| Path::new("teukolsky-out").join(name))
}

fn run_cached<C, F>(name: &str, args: &Cached, run: F) -> Result<(PathBuf, Value), CliError>
where
    C: DeserializeOwned + Serialize + Versioned,
    F: FnOnce(&C, &mut OutputDir) -> Result<Value, CliError>,
{
    let cfg: C = config::load(&args.common.config)?;
    let mut out = OutputDir::create(&out_dir(&args.common, name))?;
    let cache = if args.no_cache { None } else { Cache::from_env() };
    let key = Cache::key(name, &cfg)?;
    if let Some(summary) = cache.as_ref().and_then(|c| c.restore(&key, &mut out)) {
        log::info!("cache hit {key}");
        return Ok((out.finish(name, &cfg, "hit", summary.clone())?, summary));
    }
    let summary = run(&cfg, &mut out)?;
    let status = match &cache {
        Some(c) => match c.store(&key, &out, &summary) {
            Ok(()) => "miss",
            Err(e) => {
                log::warn!("could not write cache entry: {e}");
                "unwritable"
            }
        },
        None => "off",
    };
    Ok((out.finish(name, &cfg, status, summary.clone())?, summary))
}

fn run(cli: Cli) -> Result<(PathBuf, Value), CliError> {
    match cli.command {
        Command::Evolve { common, method, compare } => {
            let method = if compare { Method::Both } else { method };
            let cfg: config::EvolveConfig = config::load(&common.config)?;
            let mut out = OutputDir::create(&out_dir(&common, "evolve"))?;
            let summary = commands::cmd_evolve(&cfg, method, &mut out)?;
            Ok((out.finish("evolve", &cfg, "off", summary.clone())?, summary))
        }
        Command::ScanWronskian(a) => run_cached("scan-wronskian", &a, commands::cmd_scan),
        Command::Regions(a) => run_cached("regions", &a, commands::cmd_regions),
        Command::Angular(a) => run_cached("angular", &a, commands::cmd_angular),
        Command::Jost(a) => run_cached("jost", &a, commands::cmd_jost),
        Command::Green(a) => run_cached("green", &a, commands::cmd_green),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok((manifest, summary)) => {
            if let Some(pass) = summary.get("pass").and_then(Value::as_bool) {
                println!("{}", if pass { "PASS" } else { "FAIL" });
            }
            println!("manifest: {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
