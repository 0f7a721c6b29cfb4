use clap::Parser;
use foretest::adapter::reference::{ReferenceAdapter, ReferenceModel};
use foretest::adapter::VERSION_ENV;

/// Reference forecaster speaking the adapter protocol on stdin/stdout.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// echo, zeros or hang
    #[arg(long, default_value = "echo")]
    model: ReferenceModel,
    /// Accepted for command-line compatibility with model adapters.
    #[arg(long)]
    task_profile: Option<String>,
    /// Exit without answering when asked to predict at this origin (YYYY-MM-DD).
    #[arg(long)]
    crash_on: Option<chrono::NaiveDate>,
}

fn main() {
    let args = Args::parse();
    let adapter = ReferenceAdapter {
        model: args.model,
        crash_on: args.crash_on,
        env_version: std::env::var(VERSION_ENV).ok(),
    };
    let code = adapter.serve(std::io::stdin().lock(), std::io::stdout().lock());
    std::process::exit(code);
}
