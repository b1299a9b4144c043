//! Likelihood-ratio moment engines.
//!
//! The bound machinery needs, for each model, the observation-space moment
//!
//! ```text
//! eta'_theta(alpha, beta, u, v)
//!     = Int p^alpha(Y; theta+u) p^beta(Y; theta+v) / p^(alpha+beta-1)(Y; theta) dY
//! ```
//!
//! For a Gaussian model with parameterized covariance this is a ratio of
//! covariance determinants; with parameterized mean it is the exponential of
//! a weighted sum of whitened mean displacements. Both are carried as
//! natural logs: the determinants and exponentials are raised to the number
//! of snapshots, which overflows linear f64 arithmetic long before the
//! interesting SNR range is covered.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::detlemma::{det_combo3, ln_det_cov};
use crate::error::{Result, WwbError};
use crate::geometry::{steering_matrix, steering_vector, ArrayGeometry};
use crate::signal::SignalModel;

/// Argument bundle of a likelihood-ratio moment: exponents in [0, 1] and two
/// parameter displacement vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaArgs {
    pub alpha: f64,
    pub beta: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl EtaArgs {
    pub fn new(alpha: f64, beta: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let args = EtaArgs { alpha, beta, u, v };
        args.validate()?;
        Ok(args)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return Err(WwbError::Model(format!(
                "exponents must lie in [0,1], got alpha={}, beta={}",
                self.alpha, self.beta
            )));
        }
        if self.u.len() != self.v.len() {
            return Err(WwbError::Dimension(format!(
                "displacement lengths differ: {} vs {}",
                self.u.len(),
                self.v.len()
            )));
        }
        if self.u.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return Err(WwbError::Model("non-finite displacement".into()));
        }
        Ok(())
    }
}

fn shifted(theta: &[f64], d: &[f64]) -> Vec<f64> {
    theta.iter().zip(d).map(|(a, b)| a + b).collect()
}

fn check_theta(args: &EtaArgs, theta: &[f64], geometry: &ArrayGeometry) -> Result<()> {
    if theta.len() != args.u.len() {
        return Err(WwbError::Dimension(format!(
            "theta has {} entries, displacements have {}",
            theta.len(),
            args.u.len()
        )));
    }
    let p = geometry.params_per_source();
    if theta.is_empty() || theta.len() % p != 0 {
        return Err(WwbError::Dimension(format!(
            "theta length {} is not a multiple of {} parameters per source",
            theta.len(),
            p
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Parameterized covariance (unconditional model)
// ---------------------------------------------------------------------------

/// Log of the covariance-parameterized moment:
///
/// `ln eta' = T[(a+b-1) ln|R(th)| - a ln|R(th+u)| - b ln|R(th+v)|
///            - ln|a R^-1(th+u) + b R^-1(th+v) - (a+b-1) R^-1(th)|]`.
///
/// Single-source calls go through the closed-form determinant lemmas; the
/// multi-source fallback builds the covariances densely (equal source powers
/// on the diagonal of the source covariance).
pub fn eta_prime_cov_ln(
    args: &EtaArgs,
    theta: &[f64],
    geometry: &ArrayGeometry,
    model: &SignalModel,
) -> Result<f64> {
    args.validate()?;
    check_theta(args, theta, geometry)?;
    let SignalModel::Unconditional {
        sigma_s2, sigma_n2, ..
    } = model
    else {
        return Err(WwbError::Model(
            "eta_prime_cov needs the unconditional model".into(),
        ));
    };
    let t = model.snapshots() as f64;
    let (alpha, beta) = (args.alpha, args.beta);
    let tu = shifted(theta, &args.u);
    let tv = shifted(theta, &args.v);

    if theta.len() == geometry.params_per_source() {
        // Single source: |R| does not depend on theta and the combined
        // determinant has an exact closed form.
        let l = ln_det_cov(geometry, model)?;
        let det = det_combo3(
            geometry,
            model,
            [alpha, beta, 1.0 - alpha - beta],
            [&tu, &tv, theta],
        )?;
        if det.sign <= 0.0 {
            return Err(WwbError::InvalidRegion(format!(
                "combined inverse-covariance determinant is non-positive \
                 (alpha={alpha}, beta={beta})"
            )));
        }
        return Ok(-t * (l + det.ln_abs));
    }

    // Multi-source dense path.
    let r0 = dense_covariance(geometry, *sigma_s2, *sigma_n2, theta)?;
    let ru = dense_covariance(geometry, *sigma_s2, *sigma_n2, &tu)?;
    let rv = dense_covariance(geometry, *sigma_s2, *sigma_n2, &tv)?;
    let (l0, i0) = ln_det_and_inverse(&r0)?;
    let (lu, iu) = ln_det_and_inverse(&ru)?;
    let (lv, iv) = ln_det_and_inverse(&rv)?;
    let gamma_inv = iu * Complex64::new(alpha, 0.0) + iv * Complex64::new(beta, 0.0)
        - i0 * Complex64::new(alpha + beta - 1.0, 0.0);
    let det = gamma_inv.lu().determinant().re;
    if det <= 0.0 {
        return Err(WwbError::InvalidRegion(format!(
            "combined inverse-covariance determinant is non-positive \
             (alpha={alpha}, beta={beta})"
        )));
    }
    Ok(t * ((alpha + beta - 1.0) * l0 - alpha * lu - beta * lv - det.ln()))
}

/// Linear-domain value of [`eta_prime_cov_ln`].
pub fn eta_prime_cov(
    args: &EtaArgs,
    theta: &[f64],
    geometry: &ArrayGeometry,
    model: &SignalModel,
) -> Result<f64> {
    eta_prime_cov_ln(args, theta, geometry, model).map(f64::exp)
}

/// Multi-source observation covariance with equal per-source power:
/// `R = sigma_s^2 sum_m a(theta_m) a^H(theta_m) + sigma_n^2 I`.
fn dense_covariance(
    geometry: &ArrayGeometry,
    sigma_s2: f64,
    sigma_n2: f64,
    theta: &[f64],
) -> Result<DMatrix<Complex64>> {
    let cols = steering_matrix(geometry, theta)?;
    let m = geometry.len();
    let mut r = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for a in &cols {
        for i in 0..m {
            for j in 0..m {
                r[(i, j)] += sigma_s2 * a[i] * a[j].conj();
            }
        }
    }
    for i in 0..m {
        r[(i, i)] += sigma_n2;
    }
    Ok(r)
}

fn ln_det_and_inverse(r: &DMatrix<Complex64>) -> Result<(f64, DMatrix<Complex64>)> {
    let lu = r.clone().lu();
    let det = lu.determinant().re;
    if det <= 0.0 {
        return Err(WwbError::InvalidRegion(
            "observation covariance is not positive definite".into(),
        ));
    }
    let inv = lu
        .try_inverse()
        .ok_or_else(|| WwbError::InvalidRegion("observation covariance is singular".into()))?;
    Ok((det.ln(), inv))
}

// ---------------------------------------------------------------------------
// Parameterized mean (conditional model)
// ---------------------------------------------------------------------------

/// Whitened mean displacement energy
/// `Q(x, y) = sum_t || R_n^{-1/2} (A(x) - A(y)) s(t) ||^2` for
/// `R_n = sigma_n^2 I`, computed through the waveform cross-energy matrix.
fn mean_shift_energy(
    geometry: &ArrayGeometry,
    cross_energy: &[Vec<Complex64>],
    sigma_n2: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let ax = steering_matrix(geometry, x)?;
    let ay = steering_matrix(geometry, y)?;
    let n = ax.len();
    let m = geometry.len();
    let diffs: Vec<Vec<Complex64>> = (0..n)
        .map(|k| (0..m).map(|i| ax[k][i] - ay[k][i]).collect())
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let inner: Complex64 = diffs[a]
                .iter()
                .zip(&diffs[b])
                .map(|(da, db)| da.conj() * db)
                .sum();
            acc += cross_energy[a][b] * inner;
        }
    }
    Ok(acc.re / sigma_n2)
}

/// Log of the mean-parameterized moment:
///
/// `ln eta' = -[ a(1-a-b) Q(th+u, th) + a b Q(th+u, th+v) + b(1-a-b) Q(th+v, th) ]`.
///
/// Total on valid arguments; always finite.
pub fn eta_prime_mean_ln(
    args: &EtaArgs,
    theta: &[f64],
    geometry: &ArrayGeometry,
    model: &SignalModel,
) -> Result<f64> {
    args.validate()?;
    check_theta(args, theta, geometry)?;
    let SignalModel::Conditional { sigma_n2, .. } = model else {
        return Err(WwbError::Model(
            "eta_prime_mean needs the conditional model".into(),
        ));
    };
    let n_sources = theta.len() / geometry.params_per_source();
    let cross = model.waveform_cross_energy()?;
    if cross.len() != n_sources {
        return Err(WwbError::Dimension(format!(
            "{} waveforms for {} sources",
            cross.len(),
            n_sources
        )));
    }
    let (alpha, beta) = (args.alpha, args.beta);
    let tu = shifted(theta, &args.u);
    let tv = shifted(theta, &args.v);
    let q_u = mean_shift_energy(geometry, &cross, *sigma_n2, &tu, theta)?;
    let q_uv = mean_shift_energy(geometry, &cross, *sigma_n2, &tu, &tv)?;
    let q_v = mean_shift_energy(geometry, &cross, *sigma_n2, &tv, theta)?;
    Ok(-(alpha * (1.0 - alpha - beta) * q_u
        + alpha * beta * q_uv
        + beta * (1.0 - alpha - beta) * q_v))
}

/// Linear-domain value of [`eta_prime_mean_ln`].
pub fn eta_prime_mean(
    args: &EtaArgs,
    theta: &[f64],
    geometry: &ArrayGeometry,
    model: &SignalModel,
) -> Result<f64> {
    eta_prime_mean_ln(args, theta, geometry, model).map(f64::exp)
}

// ---------------------------------------------------------------------------
// zeta: whitened steering displacement energy (conditional model)
// ---------------------------------------------------------------------------

/// Index and value of the single nonzero entry, if any.
fn single_nonzero(x: &[f64]) -> Result<Option<usize>> {
    let nz: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    match nz.len() {
        0 => Ok(None),
        1 => Ok(Some(nz[0])),
        _ => Err(WwbError::Dimension(
            "test-point displacement has more than one nonzero entry".into(),
        )),
    }
}

/// `zeta(mu, rho) = sum_t || R_n^{-1/2} (A(th+mu) - A(th+rho)) s(t) ||^2`
/// for `R_n = sigma_n^2 I`, with `mu` and `rho` holding at most one nonzero
/// entry each (one test point per parameter).
///
/// When both nonzero entries fall in the same source's parameter block only
/// that source's column moves, the steering phases cancel and the result is
/// independent of theta. Across two blocks the cross term retains the
/// relative source phase.
pub fn zeta(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    theta: &[f64],
    mu: &[f64],
    rho: &[f64],
) -> Result<f64> {
    let SignalModel::Conditional { sigma_n2, .. } = model else {
        return Err(WwbError::Model("zeta needs the conditional model".into()));
    };
    let p = geometry.params_per_source();
    if theta.len() != mu.len() || theta.len() != rho.len() || theta.len() % p != 0 {
        return Err(WwbError::Dimension(
            "zeta arguments must share a length that is a multiple of the \
             parameters per source"
            .into(),
        ));
    }
    let n_sources = theta.len() / p;
    let cross = model.waveform_cross_energy()?;
    if cross.len() != n_sources {
        return Err(WwbError::Dimension(format!(
            "{} waveforms for {} sources",
            cross.len(),
            n_sources
        )));
    }
    let bi = single_nonzero(mu)?.map(|i| i / p);
    let bj = single_nonzero(rho)?.map(|j| j / p);

    let sensors = geometry.sensors();
    let tau = std::f64::consts::TAU;
    // phase of sensor i for the block displacement d (at most 2 entries)
    let phase = |i: usize, d: &[f64]| -> f64 {
        let (dx, dy) = sensors[i];
        if d.len() == 1 {
            tau * dx * d[0]
        } else {
            tau * (dx * d[0] + dy * d[1])
        }
    };

    match (bi, bj) {
        (None, None) => Ok(0.0),
        (bi, bj) if bi == bj || bi.is_none() || bj.is_none() => {
            // Same-source case: theta-independent simplified sum. The block
            // slices of an all-zero displacement are themselves zero, so one
            // branch covers mu-only, rho-only and both-in-one-block.
            let b = bi.or(bj).expect("at least one displacement is nonzero");
            let mu_b = &mu[b * p..(b + 1) * p];
            let rho_b = &rho[b * p..(b + 1) * p];
            let mut acc = 0.0;
            for i in 0..sensors.len() {
                let d = Complex64::from_polar(1.0, -phase(i, mu_b))
                    - Complex64::from_polar(1.0, -phase(i, rho_b));
                acc += d.norm_sqr();
            }
            Ok(cross[b][b].re / sigma_n2 * acc)
        }
        (bi, bj) => {
            // Cross-source case: columns m and n both move.
            let (m, n) = (
                bi.expect("cross-source mu block"),
                bj.expect("cross-source rho block"),
            );
            let mu_m = &mu[m * p..(m + 1) * p];
            let rho_n = &rho[n * p..(n + 1) * p];
            let theta_m = &theta[m * p..(m + 1) * p];
            let theta_n = &theta[n * p..(n + 1) * p];
            let mut kk = 0.0; // kappa^H kappa
            let mut rr = 0.0; // rho^H rho
            let mut kr = Complex64::new(0.0, 0.0); // kappa^H rho
            for i in 0..sensors.len() {
                let dm = Complex64::from_polar(1.0, phase(i, mu_m)) - Complex64::new(1.0, 0.0);
                let dn = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phase(i, rho_n));
                kk += dm.norm_sqr();
                rr += dn.norm_sqr();
                // conj(a_i(th_m) dm) * a_i(th_n) dn
                let rel = Complex64::from_polar(1.0, phase(i, theta_n) - phase(i, theta_m));
                kr += dm.conj() * rel * dn;
            }
            let val = (cross[m][m].re * kk + cross[n][n].re * rr
                + 2.0 * (cross[m][n] * kr).re)
                / sigma_n2;
            Ok(val)
        }
    }
}

/// `zeta` for a general (full-rank) noise covariance: the whitened quadratic
/// forms are evaluated against `R_n^{-1}` directly. Specializing
/// `R_n = sigma^2 I` reproduces [`zeta`].
pub fn zeta_general(
    geometry: &ArrayGeometry,
    rn: &DMatrix<Complex64>,
    model: &SignalModel,
    theta: &[f64],
    mu: &[f64],
    rho: &[f64],
) -> Result<f64> {
    let p = geometry.params_per_source();
    if theta.len() != mu.len() || theta.len() != rho.len() || theta.len() % p != 0 {
        return Err(WwbError::Dimension(
            "zeta arguments must share a length that is a multiple of the \
             parameters per source"
            .into(),
        ));
    }
    let n_sources = theta.len() / p;
    let cross = model.waveform_cross_energy()?;
    if cross.len() != n_sources {
        return Err(WwbError::Dimension(format!(
            "{} waveforms for {} sources",
            cross.len(),
            n_sources
        )));
    }
    let lu = rn.clone().lu();
    let rn_inv = lu
        .try_inverse()
        .ok_or_else(|| WwbError::Model("noise covariance is singular".into()))?;
    let bi = single_nonzero(mu)?.map(|i| i / p);
    let bj = single_nonzero(rho)?.map(|j| j / p);

    let block = |t: &[f64], b: usize| -> Vec<f64> { t[b * p..(b + 1) * p].to_vec() };
    let quad = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        let m = x.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                acc += x[i].conj() * rn_inv[(i, j)] * y[j];
            }
        }
        acc
    };
    let vec_diff = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
        x.iter().zip(y).map(|(a, b)| a - b).collect()
    };

    match (bi, bj) {
        (None, None) => Ok(0.0),
        (bi, bj) if bi == bj || bi.is_none() || bj.is_none() => {
            let b = bi.or(bj).expect("at least one displacement is nonzero");
            let tb = block(theta, b);
            let am = steering_vector(geometry, &shifted(&tb, &block(mu, b)))?;
            let ar = steering_vector(geometry, &shifted(&tb, &block(rho, b)))?;
            let d = vec_diff(&am, &ar);
            Ok(cross[b][b].re * quad(&d, &d).re)
        }
        (bi, bj) => {
            let (m, n) = (
                bi.expect("cross-source mu block"),
                bj.expect("cross-source rho block"),
            );
            let tm = block(theta, m);
            let tn = block(theta, n);
            let am_shift = steering_vector(geometry, &shifted(&tm, &block(mu, m)))?;
            let am = steering_vector(geometry, &tm)?;
            let an = steering_vector(geometry, &tn)?;
            let an_shift = steering_vector(geometry, &shifted(&tn, &block(rho, n)))?;
            let kappa = vec_diff(&am_shift, &am);
            let varrho = vec_diff(&an, &an_shift);
            let val = cross[m][m].re * quad(&kappa, &kappa).re
                + cross[n][n].re * quad(&varrho, &varrho).re
                + 2.0 * (cross[m][n] * quad(&kappa, &varrho)).re;
            Ok(val)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_geometry() -> ArrayGeometry {
        ArrayGeometry::new(vec![(0.0, 0.0), (0.5, 0.0)], "pair").unwrap()
    }

    #[test]
    fn cov_moment_is_one_for_zero_displacements() {
        let g = pair_geometry();
        let model = SignalModel::unconditional(1.0, 1.0, 3).unwrap();
        let args = EtaArgs::new(0.4, 0.7, vec![0.0], vec![0.0]).unwrap();
        let ln = eta_prime_cov_ln(&args, &[0.1], &g, &model).unwrap();
        assert!(ln.abs() < 1e-12);
    }

    #[test]
    fn cov_moment_is_one_for_zero_exponents() {
        let g = pair_geometry();
        let model = SignalModel::unconditional(1.0, 1.0, 3).unwrap();
        let args = EtaArgs::new(0.0, 0.0, vec![0.5], vec![-0.3]).unwrap();
        let ln = eta_prime_cov_ln(&args, &[0.1], &g, &model).unwrap();
        assert!(ln.abs() < 1e-12);
    }

    #[test]
    fn cov_moment_symmetry() {
        let g = pair_geometry();
        let model = SignalModel::unconditional(1.4, 0.8, 5).unwrap();
        let a = EtaArgs::new(0.3, 0.6, vec![0.2], vec![-0.4]).unwrap();
        let b = EtaArgs::new(0.6, 0.3, vec![-0.4], vec![0.2]).unwrap();
        let la = eta_prime_cov_ln(&a, &[0.1], &g, &model).unwrap();
        let lb = eta_prime_cov_ln(&b, &[0.1], &g, &model).unwrap();
        assert!((la - lb).abs() < 1e-12);
    }

    #[test]
    fn mean_moment_trivial_cases() {
        let g = pair_geometry();
        let model = SignalModel::conditional_constant(1.0, 1.0, 1).unwrap();
        let zero = EtaArgs::new(0.5, 0.5, vec![0.0], vec![0.0]).unwrap();
        assert!(eta_prime_mean_ln(&zero, &[0.0], &g, &model).unwrap().abs() < 1e-15);
        // alpha=1, beta=0: both coefficient products vanish for any u.
        let a10 = EtaArgs::new(1.0, 0.0, vec![0.7], vec![0.0]).unwrap();
        assert!(eta_prime_mean_ln(&a10, &[0.0], &g, &model).unwrap().abs() < 1e-15);
    }

    #[test]
    fn mean_moment_symmetry() {
        let g = ArrayGeometry::uca(4, 0.5).unwrap();
        let model = SignalModel::conditional_constant(2.0, 0.5, 3).unwrap();
        let a = EtaArgs::new(0.35, 0.55, vec![0.2, 0.0], vec![0.0, -0.3]).unwrap();
        let b = EtaArgs::new(0.55, 0.35, vec![0.0, -0.3], vec![0.2, 0.0]).unwrap();
        let la = eta_prime_mean_ln(&a, &[0.1, 0.2], &g, &model).unwrap();
        let lb = eta_prime_mean_ln(&b, &[0.1, 0.2], &g, &model).unwrap();
        assert!((la - lb).abs() < 1e-12);
    }

    #[test]
    fn zeta_half_wavelength_pair() {
        // mu = [h], rho = [0], unit waveform, T = 1, sigma_n2 = 1:
        // sum_i |exp(-j 2 pi dx_i h) - 1|^2 = 2 - 2 cos(pi h)
        let g = pair_geometry();
        let model = SignalModel::conditional_constant(1.0, 1.0, 1).unwrap();
        for &h in &[0.17, 0.5, 1.3] {
            let z = zeta(&g, &model, &[0.0], &[h], &[0.0]).unwrap();
            let expect = 2.0 - 2.0 * (std::f64::consts::PI * h).cos();
            assert!((z - expect).abs() < 1e-12, "h={h}: {z} vs {expect}");
        }
    }

    #[test]
    fn zeta_vanishes_when_displacements_coincide() {
        let g = ArrayGeometry::uca(5, 0.5).unwrap();
        let model = SignalModel::conditional_constant(1.0, 0.7, 4).unwrap();
        let z = zeta(&g, &model, &[0.1, -0.2], &[0.3, 0.0], &[0.3, 0.0]).unwrap();
        assert!(z.abs() < 1e-15);
    }

    #[test]
    fn zeta_same_source_is_theta_independent() {
        let g = ArrayGeometry::uca(6, 0.5).unwrap();
        let model = SignalModel::conditional_constant(1.5, 0.9, 7).unwrap();
        let z0 = zeta(&g, &model, &[0.0, 0.0], &[0.4, 0.0], &[0.0, 0.0]).unwrap();
        for k in 0..50 {
            let t = -1.0 + 2.0 * (k as f64) / 49.0;
            let z = zeta(&g, &model, &[t, -t * 0.5], &[0.4, 0.0], &[0.0, 0.0]).unwrap();
            assert_eq!(z, z0);
        }
    }

    #[test]
    fn zeta_rejects_two_nonzero_entries() {
        let g = ArrayGeometry::uca(4, 0.5).unwrap();
        let model = SignalModel::conditional_constant(1.0, 1.0, 2).unwrap();
        assert!(zeta(&g, &model, &[0.0, 0.0], &[0.1, 0.2], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn zeta_general_specializes_to_white_noise() {
        let g = ArrayGeometry::uca(4, 0.5).unwrap();
        let model = SignalModel::conditional_constant(1.3, 0.6, 3).unwrap();
        let m = g.len();
        let rn = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                Complex64::new(0.6, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let theta = [0.2, -0.1];
        let mu = [0.3, 0.0];
        let rho = [0.0, 0.0];
        let a = zeta(&g, &model, &theta, &mu, &rho).unwrap();
        let b = zeta_general(&g, &rn, &model, &theta, &mu, &rho).unwrap();
        assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }
}
