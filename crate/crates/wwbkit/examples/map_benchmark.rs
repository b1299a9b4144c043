//! Pit the bound against an actual estimator: Monte-Carlo global MSE of the
//! grid MAP estimator next to the optimized bound, on a small circular
//! array. Every row must satisfy MSE >= WWB (up to Monte-Carlo noise).
//!
//! Run with: cargo run --release --example map_benchmark

use wwbkit::bench::mse_sweep;
use wwbkit::scenario::parse_scenario;

fn main() -> wwbkit::Result<()> {
    let scenario = parse_scenario(
        r#"{
            "name": "uca5-demo",
            "geometry": { "kind": "uca", "sensors": 5, "spacing": 0.5 },
            "model": { "kind": "unconditional", "snapshots": 16 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 },
                       { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [-25.0, -15.0, -5.0, 5.0],
            "trials": 200,
            "seed": 7,
            "map_grid": 512,
            "optimizer": { "refine": true }
        }"#,
    )?;
    println!(
        "{} trials per point, M = 5, T = 16 (takes a minute or two)",
        scenario.trials
    );
    println!(
        "{:>7}  {:>11} {:>11} {:>8}  {:>11} {:>11}",
        "snr_db", "mse_u", "wwb_u", "ratio", "mse_v", "wwb_v"
    );
    for row in mse_sweep(&scenario)? {
        println!(
            "{:>7}  {:>11.4e} {:>11.4e} {:>8.2}  {:>11.4e} {:>11.4e}",
            row.snr_db,
            row.mse[0],
            row.wwb[0],
            row.mse[0] / row.wwb[0],
            row.mse[1],
            row.wwb[1],
        );
    }
    Ok(())
}
