//! Batch CLI for Weiss-Weinstein DOA bound studies.
//!
//! Exit codes: 0 on success, 1 when a validation check fails, 2 on usage,
//! I/O or scenario errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wwbkit::cli::{cmd_bound, cmd_mse, cmd_validate, Overrides};
use wwbkit::optimizer::HGrid;
use wwbkit::WwbError;

#[derive(Parser)]
#[command(name = "wwbkit", version, about = "Weiss-Weinstein DOA bound toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "WWBKIT_WORKERS")]
    workers: Option<usize>,
    /// Enable (1) or disable (0) one level of grid refinement.
    #[arg(long, value_parser = parse_bool01)]
    refine: Option<bool>,
    /// Comma-separated exponent candidates in (0,1), e.g. "0.3,0.5,0.7".
    #[arg(long, value_parser = parse_s_grid)]
    s_grid: Option<std::vec::Vec<f64>>,
    /// Test-point grid spec "min:max:count" (log-spaced magnitudes, both
    /// signs).
    #[arg(long, value_parser = parse_h_grid)]
    h_grid: Option<HGrid>,
    /// Add a wall-clock column to the CSV (breaks byte-identical reruns).
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized bound vs SNR, one CSV row per sweep point.
    Bound {
        #[command(flatten)]
        common: CommonFlags,
        /// V-shaped study: opening angles "start:end:step" in degrees; one
        /// bound table per angle.
        #[arg(long, value_parser = parse_delta)]
        sweep_delta: Option<(f64, f64, f64)>,
    },
    /// Monte-Carlo MAP benchmark: empirical global MSE next to the bound.
    Mse {
        #[command(flatten)]
        common: CommonFlags,
        /// Override the scenario trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run an oracle validation suite: appendix-c | appendix-d | eta-mc |
    /// prior-quadrature | closed-form-xcheck | s-stationarity | all.
    Validate {
        suite: String,
        #[arg(long, default_value_t = 20260811)]
        seed: u64,
        #[arg(long, env = "WWBKIT_WORKERS")]
        workers: Option<usize>,
    },
}

fn parse_bool01(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err("expected 0 or 1".into()),
    }
}

fn parse_s_grid(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_h_grid(s: &str) -> Result<HGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected min:max:count".into());
    }
    Ok(HGrid::LogSpaced {
        min: parts[0].parse().map_err(|e| format!("min: {e}"))?,
        max: parts[1].parse().map_err(|e| format!("max: {e}"))?,
        count: parts[2].parse().map_err(|e| format!("count: {e}"))?,
    })
}

fn parse_delta(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:end:step".into());
    }
    Ok((
        parts[0].parse().map_err(|e| format!("start: {e}"))?,
        parts[1].parse().map_err(|e| format!("end: {e}"))?,
        parts[2].parse().map_err(|e| format!("step: {e}"))?,
    ))
}

fn overrides(common: &CommonFlags, trials: Option<usize>, delta: Option<(f64, f64, f64)>) -> Overrides {
    Overrides {
        seed: common.seed,
        trials,
        refine: common.refine,
        s_grid: common.s_grid.clone(),
        h_grid: common.h_grid.clone(),
        workers: common.workers,
        sweep_delta: delta,
        timing: common.timing,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Bound {
            common,
            sweep_delta,
        } => cmd_bound(
            &common.scenario,
            &common.out,
            &overrides(common, None, *sweep_delta),
        )
        .map(|()| true),
        Command::Mse { common, trials } => cmd_mse(
            &common.scenario,
            &common.out,
            &overrides(common, *trials, None),
        )
        .map(|()| true),
        Command::Validate {
            suite,
            seed,
            workers,
        } => cmd_validate(suite, *seed, *workers),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                WwbError::Io(_)
                | WwbError::Json(_)
                | WwbError::Scenario { .. }
                | WwbError::UnknownSuite(_) => 2,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
