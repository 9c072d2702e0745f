use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gbter_anomaly::cli::{cmd_experiment, cmd_fit, cmd_stream};
use gbter_anomaly::config::RunConfig;
use gbter_anomaly::detectors::DetectorKind;
use gbter_anomaly::service;
use gbter_anomaly::Error;

/// Multi-scale anomaly detection on sequences of labeled graphs.
#[derive(Debug, Parser)]
#[command(name = "gbter", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Comma-separated detectors: prob, stats, baseline.
    #[arg(long, global = true, value_name = "LIST")]
    detectors: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "gbter-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit model parameters to a sequence (JSON or season CSV).
    Fit { sequence: PathBuf },
    /// Train on a prefix of a sequence and score the remaining snapshots.
    Stream {
        sequence: PathBuf,
        /// Number of leading snapshots used for training.
        #[arg(long)]
        train: usize,
    },
    /// Run synthetic experiment 1 or 2.
    Experiment {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=2))]
        id: u32,
    },
    /// Serve the results of a streaming run over HTTP.
    Serve {
        manifest: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::UnknownNode(_) | Error::UndefinedMode(_) | Error::ZeroVariance(_)) => EXIT_INTERNAL,
        Some(_) => EXIT_INPUT,
        None => EXIT_INTERNAL,
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(list) = &cli.detectors {
        cfg.detectors = DetectorKind::parse_list(list)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Fit { sequence } => println!("{}", cmd_fit(sequence, &cfg, &cli.out)?),
        Command::Stream { sequence, train } => println!("{}", cmd_stream(sequence, *train, &cfg, &cli.out)?),
        Command::Experiment { id } => println!("{}", cmd_experiment(*id, &cfg, &cli.out)?),
        Command::Serve { manifest, bind } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(manifest, *bind))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
