//! Optimized Weiss-Weinstein bounds of a non-uniform linear array over an
//! SNR sweep, for both signal models, with the winning test point.
//!
//! The bound is computed from the scalar closed forms and maximized over
//! the test point h at s = 1/2; watch the optimal |h| collapse from the
//! prior scale to a fraction of a beamwidth as the SNR crosses the
//! threshold region.
//!
//! Run with: cargo run --release --example linear_bounds

use wwbkit::bench::closed_form_evaluator;
use wwbkit::geometry::ArrayGeometry;
use wwbkit::optimizer::{maximize, OptimizerConfig};
use wwbkit::signal::SignalModel;

fn main() -> wwbkit::Result<()> {
    // sensors at irregular positions along Ox, in wavelengths
    let geometry = ArrayGeometry::new(
        vec![
            (0.0, 0.0),
            (0.42, 0.0),
            (1.1, 0.0),
            (1.55, 0.0),
            (2.3, 0.0),
            (3.05, 0.0),
        ],
        "nula6",
    )?;
    let snapshots = 20;
    let config = OptimizerConfig {
        refine: true,
        ..OptimizerConfig::default()
    };

    println!("{:>7}  {:>12} {:>9}  {:>12} {:>9}", "snr_db", "uwwb", "h*", "cwwb", "h*");
    for snr_db in (-30..=10).step_by(5) {
        let snr = 10f64.powf(snr_db as f64 / 10.0);

        let uncond = SignalModel::unconditional(snr, 1.0, snapshots)?;
        let eval = closed_form_evaluator(&geometry, &uncond, 1);
        let u = maximize(eval, &config, 1)?;

        let cond = SignalModel::conditional_constant(snr, 1.0, snapshots)?;
        let eval = closed_form_evaluator(&geometry, &cond, 1);
        let c = maximize(eval, &config, 1)?;

        println!(
            "{snr_db:>7}  {:>12.4e} {:>9.4}  {:>12.4e} {:>9.4}",
            u.objective, u.best_h[0], c.objective, c.best_h[0]
        );
    }
    println!("\nzero-information limit is 8/27 = {:.6}", 8.0 / 27.0);
    Ok(())
}
