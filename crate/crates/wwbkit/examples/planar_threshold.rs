//! Threshold prediction for the 16-sensor uniform circular array: the full
//! 2x2 bound matrix over an SNR sweep, computed from the planar closed
//! forms at s = 1/2.
//!
//! The three regions are visible in the diagonal entries: a flat
//! prior-dominated plateau at low SNR, a sharp threshold, and the asymptotic
//! decay. By the array's quarter-turn symmetry the u and v entries agree to
//! rounding.
//!
//! Run with: cargo run --release --example planar_threshold

use wwbkit::bench::closed_form_evaluator;
use wwbkit::geometry::ArrayGeometry;
use wwbkit::optimizer::{maximize, OptimizerConfig};
use wwbkit::signal::SignalModel;

fn main() -> wwbkit::Result<()> {
    let geometry = ArrayGeometry::uca(16, 0.5)?;
    let snapshots = 100;
    let config = OptimizerConfig {
        refine: true,
        ..OptimizerConfig::default()
    };

    println!(
        "{:>7}  {:>12} {:>12} {:>12}  {:>9} {:>7}",
        "snr_db", "wwb_uu", "wwb_vv", "wwb_uv", "h_u*", "skipped"
    );
    for snr_db in (-30..=10).step_by(5) {
        let snr = 10f64.powf(snr_db as f64 / 10.0);
        let model = SignalModel::unconditional(snr, 1.0, snapshots)?;
        let eval = closed_form_evaluator(&geometry, &model, 2);
        let r = maximize(eval, &config, 2)?;
        println!(
            "{snr_db:>7}  {:>12.4e} {:>12.4e} {:>12.4e}  {:>9.4} {:>7}",
            r.bound[0][0], r.bound[1][1], r.bound[0][1], r.best_h[0], r.skipped
        );
    }
    Ok(())
}
