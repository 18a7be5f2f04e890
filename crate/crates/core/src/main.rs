use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use corevac::runner::{parse_config, run_preset_with_jobs, write_outputs, Preset, RunnerError};

/// Damped Euler flow around a solid core with a physical-vacuum boundary.
#[derive(Debug, Parser)]
#[command(name = "corevac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the preset named in a scenario file.
    Run {
        /// Scenario file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; falls back to $COREVAC_OUT, then ./corevac-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for window-sweep cases.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the available presets.
    Presets,
}

const EXIT_ERROR: u8 = 2;

fn run(config: PathBuf, out: Option<PathBuf>, jobs: usize) -> Result<u8, RunnerError> {
    let text = std::fs::read_to_string(&config).map_err(|source| RunnerError::Io {
        context: format!("reading {}", config.display()),
        source,
    })?;
    let cfg = parse_config(&text)?;
    let dir = out
        .or_else(|| std::env::var_os("COREVAC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("corevac-out"));
    let report = run_preset_with_jobs(&cfg, jobs)?;
    write_outputs(&report, &dir).map_err(|source| RunnerError::Io {
        context: format!("writing outputs to {}", dir.display()),
        source,
    })?;
    for a in &report.assertions {
        println!("{}", a.summary());
    }
    println!("preset {} finished in {:.3} s", report.preset, report.wall_seconds);
    println!("outputs in {}", dir.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<20} {}", p.name(), p.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, jobs } => match run(config, out, jobs) {
            Ok(code) => ExitCode::from(code),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_ERROR)
            }
        },
    }
}
