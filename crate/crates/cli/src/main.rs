mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::JobConfig;
use crate::error::Result;

#[derive(Parser, Debug)]
#[command(
    name = "asymcon",
    version,
    about = "Asymptotic constants of motion for y' = sum P_k(y)/x^k"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON job configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the JSON and CSV results
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Log progress to stderr
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Roots of P_0 with their simplicity margins
    Roots,
    /// Log coefficient, constants c_k and an optional F-table
    Com,
    /// Inverted trajectory along an x-path, next to the Runge-Kutta reference
    Invert,
    /// Predicted movable singularities, optionally confirmed by shooting
    Sing,
    /// Vector field of the flow along rays from x0
    Phase,
    /// Region tags along an x-path with the overlap-band handoff check
    Regions,
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| error::CliError::Config("--config <path> is required".into()))?;
    let cfg = JobConfig::load(path)?;
    let out = Output::new(&cli.out)?;
    log::info!("{:?} with {}", cli.command, path.display());
    match cli.command {
        Command::Roots => commands::roots(&cfg, &out),
        Command::Com => commands::com(&cfg, &out),
        Command::Invert => commands::invert(&cfg, &out),
        Command::Sing => commands::sing(&cfg, &out),
        Command::Phase => commands::phase(&cfg, &out),
        Command::Regions => commands::regions(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(summary) => {
            // A closed pipe on stdout is not a failure of the run.
            let text = serde_json::to_string_pretty(&summary).expect("values serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
