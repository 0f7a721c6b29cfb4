use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use foretest::config::RunConfig;
use foretest::run::{execute, Command, Overrides};

/// Walk-forward evaluation of multivariate financial forecasters.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "foretest.toml")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for window-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Comma-separated roster entries to keep.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Read the data sources into the canonical cache.
    Ingest,
    /// Build the task's features and targets and run the stationarity checks.
    Features,
    /// Sample-efficiency probe.
    Probe,
    /// Rolling-window evaluation of the roster.
    Evaluate,
    /// Pretrained vs untrained gains of the `[transfer]` model.
    TransferGains,
    /// Signal backtest of the `[backtest]` model's forecasts.
    Backtest,
    /// Summarise existing outputs into report.md.
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Features => Command::Features,
            Cmd::Probe => Command::Probe,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::TransferGains => Command::TransferGains,
            Cmd::Backtest => Command::Backtest,
            Cmd::Report => Command::Report,
        }
    }
}

fn run(cli: &Cli) -> foretest::Result<foretest::run::Report> {
    let overrides = Overrides { seed: cli.seed, out: cli.out.clone(), jobs: cli.jobs, models: cli.models.clone() };
    let cfg = overrides.apply(RunConfig::load(&cli.config)?)?;
    execute(cli.command.into(), &cfg, overrides.models.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for w in &report.warnings {
                log::warn!("{w}");
            }
            for f in &report.failures {
                log::error!("model failure: {f}");
            }
            println!("{}: {}", Command::from(cli.command).as_str(), report.summary);
            for o in &report.outputs {
                println!("  wrote {} ({})", o.file, &o.sha256[..12]);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
