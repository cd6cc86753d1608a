//! `qcs`: band structures, shunted modes and time evolution of
//! transmon-type circuits in the Zak basis.
//!
//! Exit status: 0 when every check passed, 3 when a check failed (outputs
//! are still written), 1 on errors, 2 on usage errors.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{load_file, FileConfig, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "qcs",
    version,
    about = "Zak-basis simulation of shunted transmon circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat TOML file with any of the override keys (snake_case)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch bands and band-center/edge wavefunctions of the unshunted device
    Bands(Common),
    /// Eigenmodes of the inductively shunted device and their Zak images
    FluxoniumModes(Common),
    /// Time evolution of the band-center state under a shunt
    Evolve(Common),
    /// X-gate hold times and the Z-splitting sweep
    Protocol(Common),
}

fn run(
    name: &str,
    common: &Common,
    f: fn(&RunConfig, &Path) -> Result<Vec<String>>,
) -> Result<Vec<String>> {
    let file = match &common.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(name, file, &common.overrides)?;
    output::ensure_dir(&common.out)?;
    log::info!("{name}: writing to {}", common.out.display());
    f(&cfg, &common.out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = std::env::var("QCS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("QCS_THREADS ignored: {e}");
        }
    }
    let result = match &cli.command {
        Command::Bands(c) => run("bands", c, commands::bands),
        Command::FluxoniumModes(c) => run("fluxonium-modes", c, commands::fluxonium_modes),
        Command::Evolve(c) => run("evolve", c, commands::evolve),
        Command::Protocol(c) => run("protocol", c, commands::protocol),
    };
    match result {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("checks failed: {}", failed.join(", "));
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
