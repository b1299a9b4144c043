//! Batch front end: scenario-driven bound sweeps, MSE benchmarks and
//! validation suites, emitting CSV for external plotting.
//!
//! Output is deterministic for a fixed (scenario, seed, flags): floats are
//! printed with 17 significant digits, rows follow sweep order, and every
//! random stream is derived from the scenario seed. Timing is therefore
//! reported on stderr, not in the CSV (an opt-in `timing` flag adds a
//! wall-clock column at the cost of byte-identical reruns).

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::bench::{mse_sweep, optimize_scenario_bound};
use crate::error::{Result, WwbError};
use crate::optimizer::HGrid;
use crate::scenario::{load_scenario, GeometrySpec, Scenario};
use crate::validate::run_suite;

/// Flag-level overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub refine: Option<bool>,
    pub s_grid: Option<Vec<f64>>,
    pub h_grid: Option<HGrid>,
    pub workers: Option<usize>,
    /// V-shaped study: (start, end, step) opening angles in degrees; one
    /// bound table per angle.
    pub sweep_delta: Option<(f64, f64, f64)>,
    /// Add a wall-clock column (breaks byte-identical reruns).
    pub timing: bool,
}

impl Overrides {
    fn apply(&self, scenario: &mut Scenario) {
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        if let Some(trials) = self.trials {
            scenario.trials = trials;
        }
        if let Some(refine) = self.refine {
            scenario.optimizer.refine = refine;
        }
        if let Some(s_grid) = &self.s_grid {
            scenario.optimizer.s_grid = s_grid.clone();
        }
        if let Some(h_grid) = &self.h_grid {
            scenario.optimizer.h_grid = h_grid.clone();
        }
    }
}

/// 17-significant-digit float formatting: full f64 round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("worker pool")
            .install(f),
    }
}

fn model_label(scenario: &Scenario) -> &'static str {
    match scenario.model {
        crate::scenario::ModelSpec::Unconditional { .. } => "unconditional",
        crate::scenario::ModelSpec::Conditional { .. } => "conditional",
    }
}

fn bound_table(scenario: &Scenario, timing: bool) -> Result<String> {
    let q = scenario.q()?;
    let geometry = scenario.geometry()?;
    let label = model_label(scenario);
    let mut csv = String::new();
    match q {
        1 => csv.push_str("snr_db,model,wwb,best_h,best_s,objective,skipped"),
        _ => csv.push_str(
            "snr_db,model,wwb_u,wwb_v,wwb_uv,best_h_u,best_h_v,best_s_u,best_s_v,objective,skipped",
        ),
    }
    if timing {
        csv.push_str(",wall_time_s");
    }
    csv.push('\n');

    use rayon::prelude::*;
    let rows: Vec<Result<String>> = scenario
        .snr_sweep_db
        .par_iter()
        .map(|&snr_db| {
            let started = Instant::now();
            let model = scenario.model_at(snr_db)?;
            let r = optimize_scenario_bound(scenario, &geometry, &model)?;
            let mut row = String::new();
            write!(row, "{},{label}", fmt_f64(snr_db)).unwrap();
            if q == 1 {
                write!(
                    row,
                    ",{},{},{}",
                    fmt_f64(r.bound[0][0]),
                    fmt_f64(r.best_h[0]),
                    fmt_f64(r.best_s[0])
                )
                .unwrap();
            } else {
                write!(
                    row,
                    ",{},{},{},{},{},{},{}",
                    fmt_f64(r.bound[0][0]),
                    fmt_f64(r.bound[1][1]),
                    fmt_f64(r.bound[0][1]),
                    fmt_f64(r.best_h[0]),
                    fmt_f64(r.best_h[1]),
                    fmt_f64(r.best_s[0]),
                    fmt_f64(r.best_s[1])
                )
                .unwrap();
            }
            write!(row, ",{},{}", fmt_f64(r.objective), r.skipped).unwrap();
            if timing {
                write!(row, ",{:.3}", started.elapsed().as_secs_f64()).unwrap();
            }
            row.push('\n');
            Ok(row)
        })
        .collect();
    for row in rows {
        csv.push_str(&row?);
    }
    Ok(csv)
}

/// `bound` subcommand: one CSV row per SNR point with the optimized bound.
/// With `sweep_delta` set (V-shaped geometries only), one table per opening
/// angle is written, the angle spliced into the output file name.
pub fn cmd_bound(scenario_path: &Path, out_path: &Path, overrides: &Overrides) -> Result<()> {
    let mut scenario = load_scenario(scenario_path)?;
    overrides.apply(&mut scenario);
    scenario.validate()?;

    let started = Instant::now();
    match overrides.sweep_delta {
        None => {
            let csv = run_in_pool(overrides.workers, || bound_table(&scenario, overrides.timing))?;
            std::fs::write(out_path, csv)?;
            eprintln!(
                "bound: {} -> {} ({} SNR points, {:.2}s)",
                scenario.name,
                out_path.display(),
                scenario.snr_sweep_db.len(),
                started.elapsed().as_secs_f64()
            );
        }
        Some((start, end, step)) => {
            let GeometrySpec::Vshape {
                per_branch,
                spacing,
                ..
            } = scenario.geometry
            else {
                return Err(WwbError::Scenario {
                    path: scenario_path.display().to_string(),
                    field: "geometry".into(),
                    message: "--sweep-delta needs a vshape geometry".into(),
                });
            };
            if !(step > 0.0) || end < start {
                return Err(WwbError::Model(
                    "--sweep-delta needs start <= end and a positive step".into(),
                ));
            }
            let mut delta = start;
            while delta <= end + 1e-9 {
                let mut s = scenario.clone();
                s.geometry = GeometrySpec::Vshape {
                    per_branch,
                    delta_deg: delta,
                    spacing,
                };
                let csv = run_in_pool(overrides.workers, || bound_table(&s, overrides.timing))?;
                let path = splice_suffix(out_path, &format!("_delta{delta}"));
                std::fs::write(&path, csv)?;
                eprintln!("bound: {} delta={delta} -> {}", s.name, path.display());
                delta += step;
            }
        }
    }
    Ok(())
}

fn splice_suffix(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// `mse` subcommand: per SNR point, the empirical global MSE of the MAP
/// estimator next to the optimized bound.
pub fn cmd_mse(scenario_path: &Path, out_path: &Path, overrides: &Overrides) -> Result<()> {
    let mut scenario = load_scenario(scenario_path)?;
    overrides.apply(&mut scenario);
    if scenario.trials == 0 {
        return Err(WwbError::Scenario {
            path: scenario_path.display().to_string(),
            field: "trials".into(),
            message: "trial count must be positive".into(),
        });
    }
    scenario.validate()?;
    let q = scenario.q()?;
    let label = model_label(&scenario);

    let started = Instant::now();
    let rows = run_in_pool(overrides.workers, || mse_sweep(&scenario))?;
    let mut csv = String::new();
    match q {
        1 => csv.push_str("snr_db,model,trials,seed,mse,stderr,wwb"),
        _ => csv.push_str("snr_db,model,trials,seed,mse_u,stderr_u,wwb_u,mse_v,stderr_v,wwb_v"),
    }
    if overrides.timing {
        csv.push_str(",wall_time_s");
    }
    csv.push('\n');
    for row in &rows {
        write!(
            csv,
            "{},{label},{},{}",
            fmt_f64(row.snr_db),
            row.trials,
            scenario.seed
        )
        .unwrap();
        for k in 0..q {
            write!(
                csv,
                ",{},{},{}",
                fmt_f64(row.mse[k]),
                fmt_f64(row.stderr[k]),
                fmt_f64(row.wwb[k])
            )
            .unwrap();
        }
        if overrides.timing {
            write!(csv, ",{:.3}", started.elapsed().as_secs_f64()).unwrap();
        }
        csv.push('\n');
    }
    std::fs::write(out_path, csv)?;
    eprintln!(
        "mse: {} -> {} ({} trials x {} SNR points, {:.2}s)",
        scenario.name,
        out_path.display(),
        scenario.trials,
        scenario.snr_sweep_db.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

/// `validate` subcommand: run a named oracle suite (or `all`); prints one
/// line per suite plus any failing checks. Returns whether everything
/// passed.
pub fn cmd_validate(suite: &str, seed: u64, workers: Option<usize>) -> Result<bool> {
    let reports = run_in_pool(workers, || run_suite(suite, seed))?;
    let mut all_passed = true;
    for report in &reports {
        let passed = report.passed();
        all_passed &= passed;
        let n_pass = report.checks.iter().filter(|c| c.passed).count();
        println!(
            "[{}] {}: {}/{} checks, max deviation {:.3e}",
            if passed { "PASS" } else { "FAIL" },
            report.suite,
            n_pass,
            report.checks.len(),
            report.max_deviation()
        );
        for check in report.checks.iter().filter(|c| !c.passed) {
            println!(
                "       failed: {} (deviation {:.3e}, tolerance {:.1e})",
                check.label, check.deviation, check.tolerance
            );
        }
    }
    Ok(all_passed)
}
