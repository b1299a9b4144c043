//! Independent brute-force validators.
//!
//! Everything here deliberately avoids the closed-form code paths it is used
//! to check: covariances are built densely and factorized generically, the
//! likelihood-ratio moments are estimated by Monte-Carlo sampling of the
//! observation density, and prior integrals are done by fine quadrature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, WwbError};
use crate::eta::EtaArgs;
use crate::geometry::{steering_vector, ArrayGeometry};
use crate::logdomain::SignedLog;
use crate::prior::{support_intersection, Prior, PriorSpec};
use crate::signal::{observation_covariance, SignalModel};

/// Dense observation covariance as an nalgebra matrix.
fn covariance_matrix(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    theta: &[f64],
) -> Result<DMatrix<Complex64>> {
    let r = observation_covariance(geometry, model, theta)?;
    let m = r.len();
    Ok(DMatrix::from_fn(m, m, |i, j| r[i][j]))
}

/// `|sum_k w_k R_y^-1(theta_k)|` via dense factorization: each covariance is
/// built explicitly, inverted by LU, summed with its weight, and the
/// determinant of the sum taken by LU again. Returns (log-magnitude, sign).
pub fn dense_det_combo(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    weights: &[f64],
    thetas: &[&[f64]],
) -> Result<SignedLog> {
    if weights.len() != thetas.len() || !(2..=3).contains(&weights.len()) {
        return Err(WwbError::Model(
            "dense_det_combo takes 2 or 3 weighted terms".into(),
        ));
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(WwbError::Model("weights must sum to 1".into()));
    }
    let m = geometry.len();
    let mut acc = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for (&w, &theta) in weights.iter().zip(thetas) {
        let r = covariance_matrix(geometry, model, theta)?;
        let inv = r
            .lu()
            .try_inverse()
            .ok_or_else(|| WwbError::Model("singular input covariance".into()))?;
        acc += inv * Complex64::new(w, 0.0);
    }
    let det = acc.lu().determinant();
    Ok(SignedLog::from_value(det.re))
}

/// Monte-Carlo estimate of the observation-space moment
/// `E_{Y ~ p(.;theta)}[(p(Y;theta+u)/p(Y;theta))^alpha (p(Y;theta+v)/p(Y;theta))^beta]`
/// with its standard error. Likelihood ratios are evaluated in log domain
/// from densely factorized covariances.
pub fn mc_eta_prime<R: Rng>(
    args: &EtaArgs,
    theta: &[f64],
    geometry: &ArrayGeometry,
    model: &SignalModel,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples < 10_000 {
        return Err(WwbError::Model(
            "mc_eta_prime needs at least 10^4 samples".into(),
        ));
    }
    args.validate()?;
    let tu: Vec<f64> = theta.iter().zip(&args.u).map(|(a, b)| a + b).collect();
    let tv: Vec<f64> = theta.iter().zip(&args.v).map(|(a, b)| a + b).collect();
    let t = model.snapshots();
    let m = geometry.len();

    // Per-sample log-ratio evaluator built from first principles.
    enum Ratio {
        Cov {
            chol0: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
            inv0: DMatrix<Complex64>,
            invu: DMatrix<Complex64>,
            invv: DMatrix<Complex64>,
            ln_det0: f64,
            ln_detu: f64,
            ln_detv: f64,
        },
        Mean {
            a0: Vec<Complex64>,
            au: Vec<Complex64>,
            av: Vec<Complex64>,
            waveform: Vec<Complex64>,
            sigma_n2: f64,
        },
    }

    let ratio = match model {
        SignalModel::Unconditional { .. } => {
            let r0 = covariance_matrix(geometry, model, theta)?;
            let ru = covariance_matrix(geometry, model, &tu)?;
            let rv = covariance_matrix(geometry, model, &tv)?;
            let chol0 = r0
                .clone()
                .cholesky()
                .ok_or_else(|| WwbError::Model("covariance not positive definite".into()))?;
            let ln_det = |r: &DMatrix<Complex64>| r.clone().lu().determinant().re.ln();
            Ratio::Cov {
                ln_det0: ln_det(&r0),
                ln_detu: ln_det(&ru),
                ln_detv: ln_det(&rv),
                inv0: r0.lu().try_inverse().unwrap(),
                invu: ru.lu().try_inverse().unwrap(),
                invv: rv.lu().try_inverse().unwrap(),
                chol0,
            }
        }
        SignalModel::Conditional { sigma_n2, .. } => Ratio::Mean {
            a0: steering_vector(geometry, theta)?,
            au: steering_vector(geometry, &tu)?,
            av: steering_vector(geometry, &tv)?,
            waveform: model.waveforms()?[0].clone(),
            sigma_n2: *sigma_n2,
        },
    };

    let quad_form = |inv: &DMatrix<Complex64>, y: &[Complex64]| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..y.len() {
            for j in 0..y.len() {
                acc += y[i].conj() * inv[(i, j)] * y[j];
            }
        }
        acc.re
    };

    // One chain per worker block keeps the estimate reproducible for a fixed
    // seed while the blocks run in parallel.
    let blocks = 64usize;
    let per_block = samples.div_ceil(blocks);
    let seeds: Vec<u64> = (0..blocks).map(|_| rng.random()).collect();
    let sums: Vec<(f64, f64, usize)> = seeds
        .par_iter()
        .map(|&block_seed| {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(block_seed);
            let mut s1 = 0.0f64;
            let mut s2 = 0.0f64;
            let draw = |rng: &mut rand_chacha::ChaCha8Rng, scale: f64| -> Complex64 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (scale / 2.0).sqrt()
            };
            for _ in 0..per_block {
                // draw Y ~ p(.; theta) and accumulate the ratio product
                let mut ln_ratio = 0.0f64;
                match &ratio {
                    Ratio::Cov {
                        chol0,
                        inv0,
                        invu,
                        invv,
                        ln_det0,
                        ln_detu,
                        ln_detv,
                    } => {
                        for _ in 0..t {
                            let z: Vec<Complex64> = (0..m).map(|_| draw(&mut rng, 1.0)).collect();
                            let zv = nalgebra::DVector::from_vec(z);
                            let y: Vec<Complex64> = (chol0.l() * zv).iter().cloned().collect();
                            let q0 = quad_form(inv0, &y);
                            let qu = quad_form(invu, &y);
                            let qv = quad_form(invv, &y);
                            ln_ratio += args.alpha * (ln_det0 - ln_detu + q0 - qu)
                                + args.beta * (ln_det0 - ln_detv + q0 - qv);
                        }
                    }
                    Ratio::Mean {
                        a0,
                        au,
                        av,
                        waveform,
                        sigma_n2,
                    } => {
                        for &st in waveform {
                            let y: Vec<Complex64> = (0..m)
                                .map(|i| a0[i] * st + draw(&mut rng, *sigma_n2))
                                .collect();
                            let norm_dif = |a: &[Complex64]| -> f64 {
                                y.iter()
                                    .zip(a)
                                    .map(|(yi, ai)| (yi - ai * st).norm_sqr())
                                    .sum::<f64>()
                            };
                            let q0 = norm_dif(a0);
                            ln_ratio += (args.alpha * (q0 - norm_dif(au))
                                + args.beta * (q0 - norm_dif(av)))
                                / sigma_n2;
                        }
                    }
                }
                let w = ln_ratio.exp();
                s1 += w;
                s2 += w * w;
            }
            (s1, s2, per_block)
        })
        .collect();

    let (s1, s2, n) = sums
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, &(a, b, c)| {
            (acc.0 + a, acc.1 + b, acc.2 + c)
        });
    let n = n as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Fine composite-trapezoid evaluation of the prior-integrated moment
/// `eta(alpha, beta, u, v)` for 1- or 2-parameter priors.
///
/// The per-dimension weight is
/// `p^alpha(theta+u) p^beta(theta+v) p^(1-alpha-beta)(theta)`; uniform
/// dimensions integrate over the clipped support intersection (empty region
/// gives zero), Gaussian dimensions over +/-10 standard deviations.
pub fn quadrature_eta(
    eta_prime_ln: impl Fn(&[f64]) -> Result<f64>,
    prior: &PriorSpec,
    args: &EtaArgs,
    nodes: usize,
) -> Result<f64> {
    let q = prior.len();
    if !(1..=2).contains(&q) {
        return Err(WwbError::Prior(
            "quadrature_eta supports 1- or 2-parameter priors".into(),
        ));
    }
    if args.u.len() != q {
        return Err(WwbError::Dimension("displacement length mismatch".into()));
    }
    let mut ranges = Vec::with_capacity(q);
    for (k, p) in prior.entries.iter().enumerate() {
        match *p {
            Prior::Uniform { a, b } => match support_intersection(a, b, args.u[k], args.v[k]) {
                Some(r) => ranges.push(r),
                None => return Ok(0.0),
            },
            Prior::Gaussian { mu, sigma2 } => {
                let s = sigma2.sqrt();
                ranges.push((mu - 10.0 * s, mu + 10.0 * s));
            }
        }
    }
    let ln_weight = |theta: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (k, p) in prior.entries.iter().enumerate() {
            match *p {
                // Inside the intersected region every uniform factor is
                // exactly 1/(b-a); evaluating the density at the region
                // boundary would drop nodes to rounding.
                Prior::Uniform { a, b } => acc -= (b - a).ln(),
                Prior::Gaussian { .. } => {
                    acc += args.alpha * p.ln_density(theta[k] + args.u[k])
                        + args.beta * p.ln_density(theta[k] + args.v[k])
                        + (1.0 - args.alpha - args.beta) * p.ln_density(theta[k]);
                }
            }
        }
        acc
    };

    let steps: Vec<f64> = ranges
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (nodes - 1) as f64)
        .collect();
    let mut total = 0.0f64;
    let mut idx = vec![0usize; q];
    let mut theta = vec![0.0; q];
    loop {
        let mut w = 1.0f64;
        for k in 0..q {
            theta[k] = ranges[k].0 + idx[k] as f64 * steps[k];
            w *= steps[k] * if idx[k] == 0 || idx[k] == nodes - 1 { 0.5 } else { 1.0 };
        }
        let ln_f = eta_prime_ln(&theta)? + ln_weight(&theta);
        if ln_f.is_finite() {
            total += w * ln_f.exp();
        }
        let mut k = 0;
        loop {
            if k == q {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detlemma::{det_combo2, det_combo3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_geometry(rng: &mut ChaCha8Rng, m: usize, planar: bool) -> ArrayGeometry {
        let coords = (0..m)
            .map(|_| {
                (
                    rng.random_range(-2.0..2.0),
                    if planar { rng.random_range(-2.0..2.0) } else { 0.0 },
                )
            })
            .collect();
        ArrayGeometry::new(coords, "rand").unwrap()
    }

    #[test]
    fn dense_matches_lemmas_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..40 {
            let m = 2 + (round % 3);
            let planar = round % 2 == 0;
            let g = random_geometry(&mut rng, m, planar);
            let model = SignalModel::unconditional(
                rng.random_range(0.2..3.0),
                rng.random_range(0.2..3.0),
                1,
            )
            .unwrap();
            let p = g.params_per_source();
            let mut th = || -> Vec<f64> {
                (0..p).map(|_| rng.random_range(-0.9..0.9)).collect()
            };
            let (t1, t2, t3) = (th(), th(), th());
            let m1 = rng.random_range(-0.5..1.5);
            let m2 = 1.0 - m1;
            let lemma = det_combo2(&g, &model, m1, m2, &t1, &t2).unwrap();
            let dense =
                dense_det_combo(&g, &model, &[m1, m2], &[&t1, &t2]).unwrap();
            assert_eq!(lemma.sign, dense.sign);
            assert!(
                (lemma.ln_abs - dense.ln_abs).abs() < 1e-10,
                "combo2 {} vs {}",
                lemma.ln_abs,
                dense.ln_abs
            );

            let w1 = rng.random_range(-0.5..1.0);
            let w2 = rng.random_range(-0.5..1.0);
            let w3 = 1.0 - w1 - w2;
            let lemma = det_combo3(&g, &model, [w1, w2, w3], [&t1, &t2, &t3]).unwrap();
            let dense =
                dense_det_combo(&g, &model, &[w1, w2, w3], &[&t1, &t2, &t3]).unwrap();
            assert_eq!(lemma.sign, dense.sign);
            assert!(
                (lemma.ln_abs - dense.ln_abs).abs() < 1e-10,
                "combo3 {} vs {}",
                lemma.ln_abs,
                dense.ln_abs
            );
        }
    }

    #[test]
    fn dense_single_term_is_inverse_determinant() {
        let g = ArrayGeometry::ula(3, 0.5).unwrap();
        let model = SignalModel::unconditional(1.1, 0.9, 1).unwrap();
        let d = dense_det_combo(&g, &model, &[1.0, 0.0], &[&[0.3], &[0.1]]).unwrap();
        let expect = -crate::detlemma::ln_det_cov(&g, &model).unwrap();
        assert!((d.ln_abs - expect).abs() < 1e-10);
    }

    #[test]
    fn dense_is_permutation_invariant() {
        let g = ArrayGeometry::ula(3, 0.5).unwrap();
        let model = SignalModel::unconditional(1.1, 0.9, 1).unwrap();
        let a = dense_det_combo(&g, &model, &[0.2, 0.3, 0.5], &[&[0.1], &[0.5], &[-0.4]])
            .unwrap();
        let b = dense_det_combo(&g, &model, &[0.5, 0.2, 0.3], &[&[-0.4], &[0.1], &[0.5]])
            .unwrap();
        assert!((a.ln_abs - b.ln_abs).abs() < 1e-12);
    }

    #[test]
    fn mc_moment_is_exactly_one_for_zero_displacements() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let model = SignalModel::unconditional(1.0, 1.0, 1).unwrap();
        let args = EtaArgs::new(0.5, 0.5, vec![0.0], vec![0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (est, se) = mc_eta_prime(&args, &[0.1], &g, &model, 10_000, &mut rng).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn mc_brackets_cov_moment_reference_instance() {
        // M=2, T=1, dx=[0, 0.5], unit powers, alpha=beta=1/2, u=0.3, v=-0.3
        let g = ArrayGeometry::new(vec![(0.0, 0.0), (0.5, 0.0)], "pair").unwrap();
        let model = SignalModel::unconditional(1.0, 1.0, 1).unwrap();
        let args = EtaArgs::new(0.5, 0.5, vec![0.3], vec![-0.3]).unwrap();
        let closed = crate::eta::eta_prime_cov(&args, &[0.1], &g, &model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (est, se) =
            mc_eta_prime(&args, &[0.1], &g, &model, 1_000_000, &mut rng).unwrap();
        assert!(
            (closed - est).abs() <= 3.0 * se,
            "closed {closed} vs mc {est} +/- {se}"
        );
    }

    #[test]
    fn mc_brackets_mean_moment_reference_instance() {
        // M=2, T=1, unit waveform, alpha=beta=1/2, u=v=0.3
        let g = ArrayGeometry::new(vec![(0.0, 0.0), (0.5, 0.0)], "pair").unwrap();
        let model = SignalModel::conditional_constant(1.0, 1.0, 1).unwrap();
        let args = EtaArgs::new(0.5, 0.5, vec![0.3], vec![0.3]).unwrap();
        let closed = crate::eta::eta_prime_mean(&args, &[0.0], &g, &model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let (est, se) =
            mc_eta_prime(&args, &[0.0], &g, &model, 1_000_000, &mut rng).unwrap();
        assert!(
            (closed - est).abs() <= 3.0 * se,
            "closed {closed} vs mc {est} +/- {se}"
        );
    }

    #[test]
    fn mc_requires_minimum_samples() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let model = SignalModel::unconditional(1.0, 1.0, 1).unwrap();
        let args = EtaArgs::new(0.5, 0.5, vec![0.1], vec![0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(mc_eta_prime(&args, &[0.0], &g, &model, 100, &mut rng).is_err());
    }

    #[test]
    fn quadrature_empty_region_is_zero() {
        let prior = PriorSpec::uniform_unit(1);
        let args = EtaArgs::new(0.5, 0.5, vec![1.4], vec![-1.4]).unwrap();
        let v = quadrature_eta(|_| Ok(0.0), &prior, &args, 101).unwrap();
        assert_eq!(v, 0.0);
    }
}
