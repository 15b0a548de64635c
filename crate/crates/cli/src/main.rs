//! `orbital`: config-driven batch runner for group-action experiments.
//!
//! Exit status: 0 success, 1 ground-truth mismatch or failed operation,
//! 2 configuration error, 3 I/O error.

mod config;
mod error;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use orbital::{build, fixture, ScenarioId};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "orbital", version, about = "Run group-action experiments and write CSV reports")]
struct Cli {
    /// Experiment description to run.
    #[arg(long, value_name = "PATH", required_unless_present_any = ["list_scenarios", "verify_fixtures"])]
    config: Option<PathBuf>,
    /// Overrides the seed given in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config's [output] dir.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the built-in scenarios with their function catalogs.
    #[arg(long)]
    list_scenarios: bool,
    /// Run the ground-truth suite over every built-in scenario.
    #[arg(long)]
    verify_fixtures: bool,
}

fn list_scenarios() {
    for id in ScenarioId::ALL {
        let s = fixture(id);
        println!("{id}");
        println!("  group: {}", s.group().kind());
        println!("  functions: {}", s.function_names().collect::<Vec<_>>().join(", "));
        println!("  {}", s.metadata());
    }
}

fn run_config(cli: &Cli, path: &PathBuf) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let scenario = build(&cfg.scenario).map_err(|e| CliError::Invalid(e.to_string()))?;
    let summary = run::run(&cfg, &scenario)?;
    println!("{summary}");
    println!("summary: {}", summary.summary_path.display());
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        list_scenarios();
        return ExitCode::SUCCESS;
    }
    let result = if cli.verify_fixtures {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("orbital-verify"));
        verify::verify_fixtures(cli.seed.unwrap_or(0), &dir).map(|s| {
            println!("{s}");
            s.exit_code()
        })
    } else {
        let path = cli.config.clone().expect("clap requires --config here");
        run_config(&cli, &path)
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
