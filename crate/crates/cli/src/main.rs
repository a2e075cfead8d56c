use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use svilab_cli::summary::write_summary;
use svilab_cli::{parse_config, run_experiment, summarize_dir, CliError};

#[derive(Parser)]
#[command(name = "svilab", version, about = "Seeded experiments for stochastic variational inequality solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (row, scheme, seed) cell of a config and summarize.
    Run {
        config: PathBuf,
        /// Replace the configured seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Replace the configured oracle-call budget.
        #[arg(long)]
        budget: Option<u64>,
        /// Replace the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the summary table from the trace CSVs under DIR.
    Summarize { dir: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            budget,
            out,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::config(format!("reading {}: {e}", config.display())))?;
            let mut cfg = parse_config(&text)?;
            if let Some(seeds) = seeds {
                cfg.seeds = seeds;
            }
            if let Some(budget) = budget {
                cfg.budget = budget;
            }
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output));
            cfg.validate()?;
            let summary = run_experiment(&cfg, &out)?;
            print!("{}", summary.table());
        }
        Command::Summarize { dir } => {
            let summary = summarize_dir(&dir)?;
            write_summary(&dir, &summary)?;
            print!("{}", summary.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("svilab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
