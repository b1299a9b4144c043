//! Observation simulation and the MAP-estimator Monte Carlo benchmark.
//!
//! The benchmark draws the direction parameters fresh from the prior on
//! every trial (global MSE: the expectation runs over the joint density of
//! observations and parameters), simulates the array output, runs a
//! grid-based maximum a posteriori estimator, and accumulates the squared
//! error per parameter. Each trial derives its own RNG stream from
//! (seed, sweep row, trial index), so parallel and serial execution and any
//! worker count produce identical aggregates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::closedform::{linear_g_cond, linear_g_uncond, planar_g_cond, planar_g_uncond, PlanarBoundInputs};
use crate::error::{Result, WwbError};
use crate::geometry::{steering_vector, ArrayGeometry};
use crate::gmatrix::GMatrix;
use crate::optimizer::{maximize, WwbResult};
use crate::prior::{Prior, PriorSpec};
use crate::scenario::Scenario;
use crate::signal::SignalModel;

/// One draw of a circular complex Gaussian with total variance `var`
/// (real and imaginary parts independent, var/2 each).
#[inline]
fn draw_cn<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (var / 2.0).sqrt()
}

/// Simulate `T` snapshots of the array output at direction `theta`.
///
/// Unconditional: `y(t) = a s_t + n(t)` with `s_t ~ CN(0, sigma_s^2)`, which
/// realizes `y(t) ~ CN(0, R_y(theta))` exactly. `sigma_s2 = 0` is accepted
/// here (pure noise), although the bound machinery requires it positive.
/// Conditional: `y(t) = a s(t) + n(t)`.
pub fn simulate<R: Rng>(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    theta: &[f64],
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    let a = steering_vector(geometry, theta)?;
    let m = geometry.len();
    match model {
        SignalModel::Unconditional {
            sigma_s2,
            sigma_n2,
            snapshots,
        } => Ok((0..*snapshots)
            .map(|_| {
                let s = draw_cn(rng, *sigma_s2);
                (0..m).map(|i| a[i] * s + draw_cn(rng, *sigma_n2)).collect()
            })
            .collect()),
        SignalModel::Conditional { sigma_n2, .. } => {
            let w = model.waveforms()?;
            if w.len() != 1 {
                return Err(WwbError::Model(
                    "simulate covers single-source scenarios".into(),
                ));
            }
            Ok(w[0]
                .iter()
                .map(|&s| (0..m).map(|i| a[i] * s + draw_cn(rng, *sigma_n2)).collect())
                .collect())
        }
    }
}

/// Per-parameter search grid of the MAP estimator: uniform over the prior
/// support (a Gaussian prior searches +/- 5 standard deviations).
fn map_axis(prior: &Prior, n: usize) -> Vec<f64> {
    let (lo, hi) = match *prior {
        Prior::Uniform { a, b } => (a, b),
        Prior::Gaussian { mu, sigma2 } => {
            let s = sigma2.sqrt();
            (mu - 5.0 * s, mu + 5.0 * s)
        }
    };
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Parabolic refinement of a grid peak: offset of the vertex through three
/// equally spaced samples, clamped to half a cell.
fn parabolic_offset(fm: f64, f0: f64, fp: f64) -> f64 {
    let denom = fm - 2.0 * f0 + fp;
    if denom >= 0.0 {
        return 0.0; // not locally concave; keep the grid point
    }
    (0.5 * (fm - fp) / denom).clamp(-0.5, 0.5)
}

enum MapData {
    /// Sample covariance `sum_t y y^H` (unconditional: the log-likelihood is
    /// monotone in `a^H C a` once the theta-independent terms drop).
    Cov(Vec<Complex64>),
    /// Matched filter `sum_t y(t) s*(t)` (conditional: the quadratic term is
    /// theta-independent because steering entries have unit modulus).
    Matched(Vec<Complex64>),
}

fn map_data(y: &[Vec<Complex64>], model: &SignalModel, m: usize) -> Result<MapData> {
    match model {
        SignalModel::Unconditional { .. } => {
            let mut c = vec![Complex64::new(0.0, 0.0); m * m];
            for yt in y {
                for i in 0..m {
                    for j in 0..m {
                        c[i * m + j] += yt[i] * yt[j].conj();
                    }
                }
            }
            Ok(MapData::Cov(c))
        }
        SignalModel::Conditional { .. } => {
            let w = model.waveforms()?;
            let mut z = vec![Complex64::new(0.0, 0.0); m];
            for (yt, &st) in y.iter().zip(&w[0]) {
                for i in 0..m {
                    z[i] += yt[i] * st.conj();
                }
            }
            Ok(MapData::Matched(z))
        }
    }
}

/// Phase table `exp(j 2 pi d * x)` per sensor coordinate and grid point.
fn phase_table(coords: &[f64], axis: &[f64]) -> Vec<Vec<Complex64>> {
    axis.iter()
        .map(|&x| {
            coords
                .iter()
                .map(|&d| Complex64::from_polar(1.0, std::f64::consts::TAU * d * x))
                .collect()
        })
        .collect()
}

/// Grid MAP estimate from one observation batch.
///
/// With a uniform prior this is the support-constrained ML estimator; a
/// Gaussian prior adds its log-density. Ties break to the lowest grid index,
/// and the winning cell is refined once by parabolic interpolation per
/// dimension.
pub fn map_estimate(
    y: &[Vec<Complex64>],
    geometry: &ArrayGeometry,
    model: &SignalModel,
    prior: &PriorSpec,
    grid_n: usize,
) -> Result<Vec<f64>> {
    if grid_n < 3 {
        return Err(WwbError::Model("map grid needs at least 3 points".into()));
    }
    let q = prior.len();
    if q != geometry.params_per_source() {
        return Err(WwbError::Dimension(
            "prior dimension must match the geometry kind".into(),
        ));
    }
    let m = geometry.len();
    let data = map_data(y, model, m)?;
    let dx: Vec<f64> = geometry.sensors().iter().map(|&(x, _)| x).collect();
    let dy: Vec<f64> = geometry.sensors().iter().map(|&(_, y)| y).collect();

    // steering phases factor over the two coordinates: a_i = ex_i * ey_i
    let axes: Vec<Vec<f64>> = prior.entries.iter().map(|p| map_axis(p, grid_n)).collect();
    let ex = phase_table(&dx, &axes[0]);
    let ey = if q == 2 {
        phase_table(&dy, &axes[1])
    } else {
        vec![vec![Complex64::new(1.0, 0.0); m]]
    };

    // Beamformer: a^H C a = sum_i C_ii + 2 Re sum_{i<j} C_ij a_j conj(a_i),
    // and the diagonal is theta-independent (unit-modulus steering), so only
    // the i<j pairs are scanned: per pair, a_j conj(a_i) factors into an
    // x-phase and a y-phase table entry.
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let (c_pair, exd, eyd) = match &data {
        MapData::Cov(c) => {
            let c_pair: Vec<Complex64> = pairs.iter().map(|&(i, j)| c[i * m + j]).collect();
            let dxd: Vec<f64> = pairs.iter().map(|&(i, j)| dx[j] - dx[i]).collect();
            let dyd: Vec<f64> = pairs.iter().map(|&(i, j)| dy[j] - dy[i]).collect();
            let exd = phase_table(&dxd, &axes[0]);
            let eyd = if q == 2 {
                phase_table(&dyd, &axes[1])
            } else {
                vec![vec![Complex64::new(1.0, 0.0); pairs.len()]]
            };
            (c_pair, exd, eyd)
        }
        MapData::Matched(_) => (Vec::new(), Vec::new(), Vec::new()),
    };

    let objective = |iu: usize, iv: usize| -> f64 {
        let ll = match &data {
            MapData::Cov(_) => {
                let (xu, yv) = (&exd[iu], &eyd[iv]);
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..c_pair.len() {
                    acc += c_pair[p] * xu[p] * yv[p];
                }
                2.0 * acc.re
            }
            MapData::Matched(z) => {
                let (exu, eyv) = (&ex[iu], &ey[iv]);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    acc += (exu[i] * eyv[i]).conj() * z[i];
                }
                2.0 * acc.re
            }
        };
        let mut lp = prior.entries[0].ln_density(axes[0][iu]);
        if q == 2 {
            lp += prior.entries[1].ln_density(axes[1][iv]);
        }
        ll + lp
    };

    // exhaustive scan, lowest-index tie break
    let nv = if q == 2 { grid_n } else { 1 };
    let mut best = (0usize, 0usize);
    let mut best_val = f64::NEG_INFINITY;
    match &data {
        MapData::Cov(_) => {
            // uniform priors shift every node equally; the scan works on the
            // pair sum and re-adds the prior only for non-uniform entries
            let flat_prior = prior.all_uniform();
            for iu in 0..grid_n {
                let xu: Vec<Complex64> = c_pair
                    .iter()
                    .zip(&exd[iu])
                    .map(|(c, x)| c * x)
                    .collect();
                for iv in 0..nv {
                    let yv = &eyd[iv];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for p in 0..xu.len() {
                        acc += xu[p] * yv[p];
                    }
                    let mut val = 2.0 * acc.re;
                    if !flat_prior {
                        val += prior.entries[0].ln_density(axes[0][iu]);
                        if q == 2 {
                            val += prior.entries[1].ln_density(axes[1][iv]);
                        }
                    }
                    if val > best_val {
                        best_val = val;
                        best = (iu, iv);
                    }
                }
            }
        }
        MapData::Matched(_) => {
            for iu in 0..grid_n {
                for iv in 0..nv {
                    let val = objective(iu, iv);
                    if val > best_val {
                        best_val = val;
                        best = (iu, iv);
                    }
                }
            }
        }
    }

    // one parabolic refinement per dimension
    let refine = |axis: &[f64], idx: usize, f: &dyn Fn(usize) -> f64| -> f64 {
        if idx == 0 || idx == axis.len() - 1 {
            return axis[idx];
        }
        let step = axis[1] - axis[0];
        axis[idx] + step * parabolic_offset(f(idx - 1), f(idx), f(idx + 1))
    };
    let (bu, bv) = best;
    let mut estimate = vec![refine(&axes[0], bu, &|i| objective(i, bv))];
    if q == 2 {
        estimate.push(refine(&axes[1], bv, &|i| objective(bu, i)));
    }
    Ok(estimate)
}

/// Closed-form G evaluator for a single-source scenario at one sweep point;
/// feeds the optimizer for both the bound tables and the MSE pairing.
pub fn closed_form_evaluator<'a>(
    geometry: &'a ArrayGeometry,
    model: &'a SignalModel,
    q: usize,
) -> impl Fn(&[f64], &[f64]) -> Result<GMatrix> + Sync + 'a {
    move |h: &[f64], s: &[f64]| -> Result<GMatrix> {
        match (q, model) {
            (1, SignalModel::Unconditional { .. }) => Ok(GMatrix {
                entries: vec![vec![linear_g_uncond(h[0], s[0], geometry, model)?]],
                h: h.to_vec(),
                s: s.to_vec(),
            }),
            (1, SignalModel::Conditional { .. }) => Ok(GMatrix {
                entries: vec![vec![linear_g_cond(h[0], s[0], geometry, model)?]],
                h: h.to_vec(),
                s: s.to_vec(),
            }),
            (2, _) => {
                let inputs = PlanarBoundInputs {
                    geometry,
                    model,
                    h_u: h[0],
                    h_v: h[1],
                    s_u: s[0],
                    s_v: s[1],
                };
                match model {
                    SignalModel::Unconditional { .. } => planar_g_uncond(&inputs),
                    SignalModel::Conditional { .. } => planar_g_cond(&inputs),
                }
            }
            _ => Err(WwbError::Dimension(format!("unsupported q = {q}"))),
        }
    }
}

/// Optimized bound at one sweep point of a scenario.
pub fn optimize_scenario_bound(
    scenario: &Scenario,
    geometry: &ArrayGeometry,
    model: &SignalModel,
) -> Result<WwbResult> {
    let q = scenario.q()?;
    let evaluator = closed_form_evaluator(geometry, model, q);
    maximize(evaluator, &scenario.optimizer, q)
}

/// Per-trial record of the benchmark. The simulated observation matrix is
/// consumed by the estimator and not retained (2000 trials of M x T complex
/// samples would dwarf everything else); the drawn direction, the estimate
/// and the squared error are kept.
#[derive(Debug, Clone)]
pub struct Trial {
    pub theta: Vec<f64>,
    pub estimate: Vec<f64>,
    pub sq_err: Vec<f64>,
}

/// All trials of one sweep point plus the per-parameter aggregates.
#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub snr_db: f64,
    pub trials: Vec<Trial>,
    /// Global MSE per parameter.
    pub mse: Vec<f64>,
    /// Standard error of the MSE estimate per parameter.
    pub stderr: Vec<f64>,
}

impl TrialBatch {
    fn from_trials(snr_db: f64, trials: Vec<Trial>, q: usize) -> Self {
        let n = trials.len() as f64;
        let mut mse = vec![0.0; q];
        let mut stderr = vec![0.0; q];
        for k in 0..q {
            let mean = trials.iter().map(|t| t.sq_err[k]).sum::<f64>() / n;
            let var = trials
                .iter()
                .map(|t| (t.sq_err[k] - mean) * (t.sq_err[k] - mean))
                .sum::<f64>()
                / (n - 1.0).max(1.0);
            mse[k] = mean;
            stderr[k] = (var / n).sqrt();
        }
        TrialBatch {
            snr_db,
            trials,
            mse,
            stderr,
        }
    }
}

/// Aggregates of one sweep point, paired with the optimized bound.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub snr_db: f64,
    pub trials: usize,
    /// Global MSE per parameter.
    pub mse: Vec<f64>,
    /// Standard error of the MSE estimate per parameter.
    pub stderr: Vec<f64>,
    /// Optimized bound diagonal per parameter.
    pub wwb: Vec<f64>,
    pub best_h: Vec<f64>,
    pub best_s: Vec<f64>,
}

fn draw_theta<R: Rng>(prior: &PriorSpec, rng: &mut R) -> Vec<f64> {
    prior
        .entries
        .iter()
        .map(|p| match *p {
            Prior::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Prior::Gaussian { mu, sigma2 } => {
                mu + sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal)
            }
        })
        .collect()
}

/// Run all trials of one sweep point. Each trial draws a fresh direction
/// from the prior (the expectation of the global MSE runs over the joint
/// density of parameters and observations), with its RNG stream derived
/// from (seed, row index, trial index).
pub fn run_trials(scenario: &Scenario, row_idx: usize, snr_db: f64) -> Result<TrialBatch> {
    let geometry = scenario.geometry()?;
    let prior = scenario.prior_spec()?;
    let model = scenario.model_at(snr_db)?;
    let trials: Vec<Trial> = (0..scenario.trials)
        .into_par_iter()
        .map(|trial_idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
            rng.set_stream(((row_idx as u64) << 40) | trial_idx as u64);
            let theta = draw_theta(&prior, &mut rng);
            let y = simulate(&geometry, &model, &theta, &mut rng)?;
            let estimate = map_estimate(&y, &geometry, &model, &prior, scenario.map_grid)?;
            let sq_err = theta
                .iter()
                .zip(&estimate)
                .map(|(t, e)| (t - e) * (t - e))
                .collect();
            Ok(Trial {
                theta,
                estimate,
                sq_err,
            })
        })
        .collect::<Result<Vec<Trial>>>()?;
    Ok(TrialBatch::from_trials(snr_db, trials, scenario.q()?))
}

/// Run the Monte-Carlo benchmark over the scenario's SNR sweep: per point,
/// the optimized bound and the empirical global MSE of the MAP estimator.
pub fn mse_sweep(scenario: &Scenario) -> Result<Vec<SweepRow>> {
    if scenario.trials == 0 {
        return Err(WwbError::Model("trial count must be positive".into()));
    }
    scenario.validate()?;
    let geometry = scenario.geometry()?;
    let q = scenario.q()?;
    let mut rows = Vec::with_capacity(scenario.snr_sweep_db.len());
    for (row_idx, &snr_db) in scenario.snr_sweep_db.iter().enumerate() {
        let model = scenario.model_at(snr_db)?;
        let wwb = optimize_scenario_bound(scenario, &geometry, &model)?;
        let batch = run_trials(scenario, row_idx, snr_db)?;
        rows.push(SweepRow {
            snr_db,
            trials: batch.trials.len(),
            mse: batch.mse,
            stderr: batch.stderr,
            wwb: (0..q).map(|k| wwb.bound[k][k]).collect(),
            best_h: wwb.best_h.clone(),
            best_s: wwb.best_s.clone(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_conditional_data_recovers_grid_point() {
        let g = ArrayGeometry::ula(4, 0.5).unwrap();
        let model = SignalModel::conditional_constant(1.0, 1e-12, 8).unwrap();
        let prior = PriorSpec::uniform_unit(1);
        // theta exactly on the 65-point grid
        let axis = map_axis(&prior.entries[0], 65);
        let theta = vec![axis[41]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = simulate(&g, &model, &theta, &mut rng).unwrap();
        let est = map_estimate(&y, &g, &model, &prior, 65).unwrap();
        assert!((est[0] - theta[0]).abs() < 1e-6);
    }

    #[test]
    fn simulator_is_reproducible() {
        let g = ArrayGeometry::uca(4, 0.5).unwrap();
        let model = SignalModel::unconditional(1.0, 1.0, 16).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        let y1 = simulate(&g, &model, &[0.1, 0.2], &mut r1).unwrap();
        let y2 = simulate(&g, &model, &[0.1, 0.2], &mut r2).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn pure_noise_sample_covariance_approaches_identity() {
        // sigma_s2 = 0 is allowed in the simulator only
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let model = SignalModel::Unconditional {
            sigma_s2: 0.0,
            sigma_n2: 1.0,
            snapshots: 100_000,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = simulate(&g, &model, &[0.0], &mut rng).unwrap();
        let n = y.len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let c: Complex64 = y.iter().map(|yt| yt[i] * yt[j].conj()).sum::<Complex64>() / n;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (c.re - expect).abs() < 0.05 && c.im.abs() < 0.05,
                    "entry ({i},{j}) = {c}"
                );
            }
        }
    }

    #[test]
    fn map_equals_ml_for_uniform_prior() {
        // the uniform prior shifts the objective by a constant, so the MAP
        // winner must coincide with a brute-force grid ML argmax computed
        // from explicitly built steering vectors
        let g = ArrayGeometry::ula(3, 0.5).unwrap();
        let model = SignalModel::unconditional(5.0, 1.0, 10).unwrap();
        let prior = PriorSpec::uniform_unit(1);
        let n = 257;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let theta = draw_theta(&prior, &mut rng);
            let y = simulate(&g, &model, &theta, &mut rng).unwrap();
            let est = map_estimate(&y, &g, &model, &prior, n).unwrap();

            let mut best = (f64::NEG_INFINITY, 0.0);
            for i in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let a = crate::geometry::steering_vector(&g, &[x]).unwrap();
                let ml: f64 = y
                    .iter()
                    .map(|yt| {
                        let c: Complex64 =
                            a.iter().zip(yt).map(|(ai, yi)| ai.conj() * yi).sum();
                        c.norm_sqr()
                    })
                    .sum();
                if ml > best.0 {
                    best = (ml, x);
                }
            }
            // same winning cell (the estimate is the parabola-refined peak)
            assert!(
                (est[0] - best.1).abs() <= 2.0 / (n - 1) as f64,
                "map {} vs ml argmax {}",
                est[0],
                best.1
            );
        }
    }

    #[test]
    fn high_snr_map_lands_within_one_cell() {
        // asymptotic-region sanity: at sigma_s2/sigma_n2 = 1e4 the estimate
        // sits within one grid cell of the true direction
        let g = ArrayGeometry::uca(16, 0.5).unwrap();
        let model = SignalModel::unconditional(1e4, 1.0, 100).unwrap();
        let prior = PriorSpec::uniform_unit(2);
        let n = 256;
        let cell = 2.0 / (n - 1) as f64;
        let mut hits = 0;
        let trials = 200;
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
            let theta = draw_theta(&prior, &mut rng);
            let y = simulate(&g, &model, &theta, &mut rng).unwrap();
            let est = map_estimate(&y, &g, &model, &prior, n).unwrap();
            if (est[0] - theta[0]).abs() <= cell && (est[1] - theta[1]).abs() <= cell {
                hits += 1;
            }
        }
        assert!(hits >= 198, "only {hits}/{trials} trials within one cell");
    }

    #[test]
    fn zero_trials_rejected() {
        let text = r#"{
            "name": "pair",
            "geometry": { "kind": "ula", "sensors": 2, "spacing": 0.5 },
            "model": { "kind": "unconditional", "snapshots": 4 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [0.0],
            "trials": 0
        }"#;
        let scenario = crate::scenario::parse_scenario(text).unwrap();
        assert!(mse_sweep(&scenario).is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let text = r#"{
            "name": "tiny",
            "geometry": { "kind": "ula", "sensors": 3, "spacing": 0.5 },
            "model": { "kind": "unconditional", "snapshots": 4 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [5.0],
            "trials": 16,
            "seed": 77,
            "map_grid": 64,
            "optimizer": { "h_grid": { "min": 0.01, "max": 1.9, "count": 24 } }
        }"#;
        let scenario = crate::scenario::parse_scenario(text).unwrap();
        let a = mse_sweep(&scenario).unwrap();
        let b = mse_sweep(&scenario).unwrap();
        assert_eq!(a[0].mse, b[0].mse);
        assert_eq!(a[0].wwb, b[0].wwb);
    }
}
