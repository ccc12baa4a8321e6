//! `starfd` command line: run a configured batch, a built-in figure batch, or
//! the acceptance checks.
//!
//! Exit codes: 0 success, 1 usage, configuration or output error, 2 at least
//! one run failed, 3 an acceptance check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use starfd::experiment::{figure_config, run_experiment, write_outputs, ExperimentConfig};
use starfd_validate::Suite;

#[derive(Parser)]
#[command(name = "starfd", version, about = "STAR-RIS full-duplex transmit power minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the batch described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in desk-scale figure batch.
    Figure {
        #[arg(long)]
        id: u32,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks and print one line per check.
    Validate,
}

const CONFIG_ERROR: u8 = 1;
const RUN_FAILED: u8 = 2;
const VALIDATION_FAILED: u8 = 3;

fn execute(cfg: &ExperimentConfig, out: &Path) -> ExitCode {
    let result = match run_experiment(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Err(e) = write_outputs(cfg, &result, out) {
        eprintln!("error: writing {}: {e}", out.display());
        return ExitCode::from(CONFIG_ERROR);
    }
    let failed = result.failures();
    println!(
        "{} runs, {} failed; wrote {}",
        result.summary.len(),
        failed,
        out.display()
    );
    if failed > 0 {
        for r in result.summary.iter().filter(|r| r.status.is_failure()) {
            eprintln!("{} seed {}: {}", r.scheme.name(), r.seed, r.status.label());
        }
        return ExitCode::from(RUN_FAILED);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    // usage errors count as configuration errors, not clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(CONFIG_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, out } => match ExperimentConfig::load(&config) {
            Ok(cfg) => execute(&cfg, &out),
            Err(e) => {
                eprintln!("error: {}: {e}", config.display());
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::Figure { id, seeds, out } => match figure_config(id, seeds) {
            Ok(cfg) => execute(&cfg, &out),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(CONFIG_ERROR)
            }
        },
        Command::Validate => {
            let reports = Suite::new().run_all(|r| println!("{}", r.line()));
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("acceptance: {} passed, {} failed", reports.len() - failed, failed);
            if failed > 0 {
                ExitCode::from(VALIDATION_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
