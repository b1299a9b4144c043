//! Acceptance suite: every criterion prints one PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! (they are also printed on failure). The heavy Monte-Carlo criteria keep
//! within their stated runtime budgets on a desktop-class machine.

use wwbkit::bench::{closed_form_evaluator, mse_sweep};
use wwbkit::cli::{cmd_bound, cmd_mse, Overrides};
use wwbkit::geometry::ArrayGeometry;
use wwbkit::optimizer::{maximize, HGrid, OptimizerConfig};
use wwbkit::scenario::{parse_scenario, GeometrySpec};
use wwbkit::signal::SignalModel;
use wwbkit::validate;

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "[{}] {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

/// Criterion 1: zero-information limit of the optimized linear bounds.
/// At -80 dB both the unconditional and conditional bounds converge to
/// 8/27, the maximum of |h|(1 - |h|/2)^2, within the 1e-3 grid tolerance.
#[test]
fn criterion_1_zero_information_limit() {
    let start = std::time::Instant::now();
    let geometry = ArrayGeometry::ula(8, 0.5).unwrap();
    let config = OptimizerConfig {
        refine: true,
        ..OptimizerConfig::default()
    };
    let target = 8.0 / 27.0;

    let uncond = SignalModel::unconditional(1e-8, 1.0, 20).unwrap();
    let eval = closed_form_evaluator(&geometry, &uncond, 1);
    let u = maximize(eval, &config, 1).unwrap().objective;

    let cond = SignalModel::conditional_constant(1e-8, 1.0, 20).unwrap();
    let eval = closed_form_evaluator(&geometry, &cond, 1);
    let c = maximize(eval, &config, 1).unwrap().objective;

    let (du, dc) = ((u - target).abs(), (c - target).abs());
    report(
        "criterion 1 (zero-information limit 8/27)",
        du < 1e-3 && dc < 1e-3 && start.elapsed().as_secs_f64() < 1.0,
        &format!(
            "uwwb dev {du:.2e}, cwwb dev {dc:.2e}, {:.2}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 2: closed forms match the general engine on 50 random planar
/// geometries, both models, every G entry within 1e-10 relative.
#[test]
fn criterion_2_closed_form_general_equivalence() {
    let start = std::time::Instant::now();
    let r = validate::closed_form_xcheck(20260811).unwrap();
    report(
        "criterion 2 (closed form vs general engine)",
        r.passed() && start.elapsed().as_secs_f64() < 30.0,
        &format!(
            "{} checks, max rel dev {:.3e}, {:.2}s",
            r.checks.len(),
            r.max_deviation(),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 3: determinant lemmas vs the dense oracle, 200 random
/// instances with M in {2,3,4}, within 1e-10 relative.
#[test]
fn criterion_3_determinant_lemmas() {
    let start = std::time::Instant::now();
    let r = validate::appendix_c(20260811).unwrap();
    report(
        "criterion 3 (determinant lemmas vs dense oracle)",
        r.checks.len() == 200 && r.passed() && start.elapsed().as_secs_f64() < 10.0,
        &format!(
            "{} checks, max rel dev {:.3e}, {:.2}s",
            r.checks.len(),
            r.max_deviation(),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 4: the Monte-Carlo oracle with 1e6 samples brackets both
/// moment engines within 3 standard errors on M=2, T=1 instances.
#[test]
fn criterion_4_moment_engines_vs_monte_carlo() {
    let start = std::time::Instant::now();
    let r = validate::eta_mc(20260811, 1_000_000).unwrap();
    report(
        "criterion 4 (moment closed forms vs MC oracle)",
        r.checks.len() == 10 && r.passed() && start.elapsed().as_secs_f64() < 60.0,
        &format!(
            "{} instances, worst deviation {:.2} standard errors, {:.2}s",
            r.checks.len(),
            r.max_deviation(),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 5: uniform length factors and Gaussian exponential factors vs
/// 1e5-node quadrature on 20 random tuples, within 1e-8.
#[test]
fn criterion_5_prior_factor_formulas() {
    let start = std::time::Instant::now();
    let r = validate::prior_quadrature(20260811).unwrap();
    report(
        "criterion 5 (prior factors vs quadrature)",
        r.passed() && start.elapsed().as_secs_f64() < 30.0,
        &format!(
            "{} checks, max rel dev {:.3e}, {:.2}s",
            r.checks.len(),
            r.max_deviation(),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 6: s = 1/2 stationarity of the linear bounds, central finite
/// difference with step 1e-4 below 1e-6 in magnitude on 20 random points.
#[test]
fn criterion_6_s_stationarity() {
    let start = std::time::Instant::now();
    let r = validate::s_stationarity(20260811).unwrap();
    report(
        "criterion 6 (s = 1/2 stationarity, linear arrays)",
        r.passed() && start.elapsed().as_secs_f64() < 5.0,
        &format!(
            "{} finite differences, max |d/ds| {:.3e}, {:.2}s",
            r.checks.len(),
            r.max_deviation(),
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 7: desk-scale bound property. UCA M=8, T=20, unconditional,
/// 500 MAP trials at 5 SNR points spanning the threshold region:
/// MSE >= WWB - 2 stderr everywhere, high-SNR MSE within 10x of the bound,
/// low-SNR MSE within 10% of the flat-prior random-guess level (2/3 per
/// direction cosine).
#[test]
fn criterion_7_bound_vs_map_mse() {
    let start = std::time::Instant::now();
    let scenario = parse_scenario(include_str!("../scenarios/uca8_bench.json")).unwrap();
    let rows = mse_sweep(&scenario).unwrap();
    let q = 2;

    let mut bound_ok = true;
    for row in &rows {
        for k in 0..q {
            if row.mse[k] < row.wwb[k] - 2.0 * row.stderr[k] {
                bound_ok = false;
            }
            // the support diameter caps any squared error at 2^2
            assert!(row.mse[k] <= 4.0, "MSE above the support-diameter cap");
        }
    }
    // Three-region shape of the MSE-vs-SNR curve (the two direction cosines
    // are statistically identical for this symmetric array, so the curve is
    // their mean): low-SNR end at the random-guess level, high-SNR end
    // within 10x of the bound.
    let curve = |row: &wwbkit::bench::SweepRow| -> f64 {
        row.mse.iter().sum::<f64>() / row.mse.len() as f64
    };
    let low = &rows[0];
    let high = rows.last().unwrap();
    let guess = 2.0 / 3.0;
    let low_dev = (curve(low) - guess).abs() / guess;
    let high_ratio = curve(high) / (high.wwb.iter().sum::<f64>() / q as f64);
    let low_ok = low_dev < 0.10;
    let high_ok = high_ratio <= 10.0;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 7 (MSE >= WWB with three-region shape)",
        bound_ok && low_ok && high_ok && elapsed < 600.0,
        &format!(
            "{} points x {} trials; low-SNR mse {:.3} vs guess {guess:.3} ({:.1}% off); \
             high-SNR mse/wwb {high_ratio:.2}; {elapsed:.0}s",
            rows.len(),
            rows[0].trials,
            curve(low),
            100.0 * low_dev,
        ),
    );
}

/// Criterion 8: V-shaped array, conditional model, T=20, branches of 6
/// sensors plus one at the origin, fixed threshold-region SNR (-20 dB):
/// the optimized v bound at 90 degrees is the smallest of {30, 60, 90},
/// and the u bound varies by less than 25% across the same set.
#[test]
fn criterion_8_v_shaped_opening_angle() {
    let start = std::time::Instant::now();
    let snr_db = -20.0;
    let config = OptimizerConfig {
        refine: true,
        ..OptimizerConfig::default()
    };
    let mut wwb_u = Vec::new();
    let mut wwb_v = Vec::new();
    for &delta in &[30.0f64, 60.0, 90.0] {
        let geometry = ArrayGeometry::v_shaped(6, delta.to_radians(), 0.5).unwrap();
        let model =
            SignalModel::conditional_constant(10f64.powf(snr_db / 10.0), 1.0, 20).unwrap();
        let eval = closed_form_evaluator(&geometry, &model, 2);
        let r = maximize(eval, &config, 2).unwrap();
        wwb_u.push(r.bound[0][0]);
        wwb_v.push(r.bound[1][1]);
    }
    let v90_best = wwb_v[2] <= wwb_v[0] && wwb_v[2] <= wwb_v[1];
    let u_min = wwb_u.iter().cloned().fold(f64::INFINITY, f64::min);
    let u_max = wwb_u.iter().cloned().fold(0.0f64, f64::max);
    let u_spread = (u_max - u_min) / u_min;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 8 (V-shape: 90 deg optimal for v, u varies slightly)",
        v90_best && u_spread < 0.25 && elapsed < 120.0,
        &format!(
            "wwb_v = ({:.3e}, {:.3e}, {:.3e}) at (30,60,90) deg; u spread {:.1}%; {elapsed:.1}s",
            wwb_v[0],
            wwb_v[1],
            wwb_v[2],
            100.0 * u_spread
        ),
    );
}

/// Criterion 9: UCA-16 symmetry: |WWB_uu - WWB_vv| / WWB_uu below 1e-10 at
/// every sweep point of the shipped scenario.
#[test]
fn criterion_9_uca_symmetry() {
    let start = std::time::Instant::now();
    let scenario = parse_scenario(include_str!("../scenarios/uca16_unconditional.json")).unwrap();
    let geometry = scenario.geometry().unwrap();
    let mut worst = 0.0f64;
    for &snr_db in &scenario.snr_sweep_db {
        let model = scenario.model_at(snr_db).unwrap();
        let eval = closed_form_evaluator(&geometry, &model, 2);
        let r = maximize(eval, &scenario.optimizer, 2).unwrap();
        worst = worst.max((r.bound[0][0] - r.bound[1][1]).abs() / r.bound[0][0]);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 9 (UCA-16 u/v symmetry)",
        worst < 1e-10 && elapsed < 60.0,
        &format!("max asymmetry {worst:.3e} over {} SNR points, {elapsed:.1}s",
            scenario.snr_sweep_db.len()),
    );
}

/// Criterion 10: byte-identical CSV from `bound` and `mse` across reruns
/// and across worker counts 1 and 4.
#[test]
fn criterion_10_deterministic_csv() {
    let start = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = dir.path().join("tiny.json");
    std::fs::write(
        &scenario_path,
        r#"{
            "name": "tiny-determinism",
            "geometry": { "kind": "uca", "sensors": 5, "spacing": 0.5 },
            "model": { "kind": "unconditional", "snapshots": 10 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 },
                       { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [-20.0, -5.0, 5.0],
            "trials": 48,
            "seed": 4242,
            "map_grid": 128,
            "optimizer": { "h_grid": { "min": 0.01, "max": 1.9, "count": 40 },
                           "refine": true }
        }"#,
    )
    .unwrap();

    let run = |suffix: &str, workers: usize| -> (Vec<u8>, Vec<u8>) {
        let bound_out = dir.path().join(format!("bound_{suffix}.csv"));
        let mse_out = dir.path().join(format!("mse_{suffix}.csv"));
        let overrides = Overrides {
            workers: Some(workers),
            ..Overrides::default()
        };
        cmd_bound(&scenario_path, &bound_out, &overrides).unwrap();
        cmd_mse(&scenario_path, &mse_out, &overrides).unwrap();
        (
            std::fs::read(&bound_out).unwrap(),
            std::fs::read(&mse_out).unwrap(),
        )
    };
    let (b1, m1) = run("w1a", 1);
    let (b2, m2) = run("w1b", 1);
    let (b4, m4) = run("w4", 4);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 10 (byte-identical CSV across runs and worker counts)",
        b1 == b2 && b1 == b4 && m1 == m2 && m1 == m4 && elapsed < 120.0,
        &format!(
            "bound {} bytes, mse {} bytes, workers {{1,4}}, {elapsed:.1}s",
            b1.len(),
            m1.len()
        ),
    );
}

/// Scenario shipped for the paper-scale study parses and matches the
/// documented setup (M = 16 circular array, 100 snapshots).
#[test]
fn shipped_uca16_scenario_matches_study_setup() {
    let scenario = parse_scenario(include_str!("../scenarios/uca16_unconditional.json")).unwrap();
    let g = scenario.geometry().unwrap();
    assert_eq!(g.len(), 16);
    assert!(matches!(
        scenario.geometry,
        GeometrySpec::Uca { sensors: 16, .. }
    ));
    assert_eq!(scenario.model_at(0.0).unwrap().snapshots(), 100);
    assert_eq!(scenario.q().unwrap(), 2);
}
