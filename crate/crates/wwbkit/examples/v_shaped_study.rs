//! How the opening angle of a V-shaped array steers the accuracy trade-off
//! between the two direction cosines (conditional model, known waveform).
//!
//! Widening the V toward 90 degrees grows the aperture along Oy at the
//! expense of Ox: the v bound drops sharply while the u bound moves little
//! in the threshold region.
//!
//! Run with: cargo run --release --example v_shaped_study

use wwbkit::bench::closed_form_evaluator;
use wwbkit::geometry::ArrayGeometry;
use wwbkit::optimizer::{maximize, OptimizerConfig};
use wwbkit::signal::SignalModel;

fn main() -> wwbkit::Result<()> {
    let snapshots = 20;
    let snr_db = -20.0; // threshold region for this setup
    let snr = 10f64.powf(snr_db / 10.0);
    let config = OptimizerConfig {
        refine: true,
        ..OptimizerConfig::default()
    };

    println!("conditional model, T = {snapshots}, snr = {snr_db} dB, 6 sensors per branch");
    println!("{:>9}  {:>12} {:>12}", "delta", "wwb_u", "wwb_v");
    for delta_deg in [30.0f64, 45.0, 60.0, 75.0, 90.0] {
        let geometry = ArrayGeometry::v_shaped(6, delta_deg.to_radians(), 0.5)?;
        let model = SignalModel::conditional_constant(snr, 1.0, snapshots)?;
        let eval = closed_form_evaluator(&geometry, &model, 2);
        let r = maximize(eval, &config, 2)?;
        println!(
            "{delta_deg:>8}d  {:>12.4e} {:>12.4e}",
            r.bound[0][0], r.bound[1][1]
        );
    }
    Ok(())
}
