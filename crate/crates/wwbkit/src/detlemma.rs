//! Closed-form determinants of weighted sums of inverse observation
//! covariances for the single-source unconditional model.
//!
//! With `R_y(theta) = sigma_s^2 a a^H + sigma_n^2 I` and weights summing to
//! one, `|sum_k m_k R_y^-1(theta_k)|` reduces to a polynomial in the pairwise
//! steering inner products: the weighted sum has M-3 eigenvalues equal to
//! `1/sigma_n^2` and the remaining three are roots of a cubic whose constant
//! term is all we need. Results are carried as (log-magnitude, sign) so they
//! survive being raised to the snapshot count.

use crate::error::{Result, WwbError};
use crate::geometry::{steering_inner, ArrayGeometry};
use crate::logdomain::SignedLog;
use crate::signal::SignalModel;

/// Tolerance on the weight-sum precondition; weights arrive from exact
/// arithmetic on s values.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

fn unconditional_powers(model: &SignalModel) -> Result<(f64, f64)> {
    match model {
        SignalModel::Unconditional {
            sigma_s2, sigma_n2, ..
        } => Ok((*sigma_s2, *sigma_n2)),
        _ => Err(WwbError::Model(
            "determinant lemmas need the unconditional model".into(),
        )),
    }
}

/// `ln |R_y(theta)| = M ln sigma_n^2 + ln(1 + M sigma_s^2 / sigma_n^2)`.
/// Independent of theta because steering entries have unit modulus.
pub fn ln_det_cov(geometry: &ArrayGeometry, model: &SignalModel) -> Result<f64> {
    let (sigma_s2, sigma_n2) = unconditional_powers(model)?;
    let m = geometry.len() as f64;
    Ok(m * sigma_n2.ln() + (1.0 + m * sigma_s2 / sigma_n2).ln())
}

/// `|m1 R_y^-1(t1) + m2 R_y^-1(t2)|` with `m1 + m2 = 1`.
pub fn det_combo2(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    m1: f64,
    m2: f64,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<SignedLog> {
    if (m1 + m2 - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(WwbError::Model(format!(
            "det_combo2 weights must sum to 1, got {}",
            m1 + m2
        )));
    }
    let (sigma_s2, sigma_n2) = unconditional_powers(model)?;
    let m = geometry.len() as f64;
    let phi = sigma_s2 / (sigma_s2 * m + sigma_n2);
    // 1 - phi*M computed in its analytic form to avoid cancellation at high
    // SNR; the residual weight defect is folded back in.
    let base = sigma_n2 / (sigma_s2 * m + sigma_n2) + (1.0 - m1 - m2) * phi * m;
    let g12 = steering_inner(geometry, theta1, theta2)?.norm_sqr();
    let bracket = base - m1 * phi * m2 * phi * (g12 - m * m);
    Ok(SignedLog::from_coeff_exp(bracket, -m * sigma_n2.ln()))
}

/// `|m1 R_y^-1(t1) + m2 R_y^-1(t2) + m3 R_y^-1(t3)|` with
/// `m1 + m2 + m3 = 1`.
pub fn det_combo3(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    weights: [f64; 3],
    thetas: [&[f64]; 3],
) -> Result<SignedLog> {
    let [m1, m2, m3] = weights;
    if (m1 + m2 + m3 - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(WwbError::Model(format!(
            "det_combo3 weights must sum to 1, got {}",
            m1 + m2 + m3
        )));
    }
    let (sigma_s2, sigma_n2) = unconditional_powers(model)?;
    let m = geometry.len() as f64;
    let phi = sigma_s2 / (sigma_s2 * m + sigma_n2);
    let base = sigma_n2 / (sigma_s2 * m + sigma_n2) + (1.0 - m1 - m2 - m3) * phi * m;

    let g12 = steering_inner(geometry, thetas[0], thetas[1])?;
    let g13 = steering_inner(geometry, thetas[0], thetas[2])?;
    let g23 = steering_inner(geometry, thetas[1], thetas[2])?;
    let (n12, n13, n23) = (g12.norm_sqr(), g13.norm_sqr(), g23.norm_sqr());

    let pair = m1 * m2 * (n12 - m * m) + m1 * m3 * (n13 - m * m) + m2 * m3 * (n23 - m * m);
    // g32 * g13 * g21 = conj(g23) * g13 * conj(g12)
    let triple_re = (g23.conj() * g13 * g12.conj()).re;
    let cubic = m * m * m - m * (n12 + n13 + n23) + 2.0 * triple_re;

    let bracket = base - phi * phi * pair - m1 * m2 * m3 * phi * phi * phi * cubic;
    Ok(SignedLog::from_coeff_exp(bracket, -m * sigma_n2.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ArrayGeometry, SignalModel) {
        let g = ArrayGeometry::new(vec![(0.0, 0.0), (0.41, 0.0), (1.07, 0.0)], "nula3").unwrap();
        let m = SignalModel::unconditional(1.3, 0.7, 1).unwrap();
        (g, m)
    }

    #[test]
    fn identical_thetas_give_inverse_covariance_det() {
        let (g, model) = setup();
        let d = det_combo2(&g, &model, 0.3, 0.7, &[0.2], &[0.2]).unwrap();
        let expect = -ln_det_cov(&g, &model).unwrap();
        assert!((d.ln_abs - expect).abs() < 1e-12);
        assert_eq!(d.sign, 1.0);
    }

    #[test]
    fn degenerate_weight_reduces_to_single_inverse() {
        let (g, model) = setup();
        let d = det_combo2(&g, &model, 1.0, 0.0, &[0.2], &[-0.6]).unwrap();
        let expect = -ln_det_cov(&g, &model).unwrap();
        assert!((d.ln_abs - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_third_weight_matches_combo2() {
        let (g, model) = setup();
        let d3 = det_combo3(&g, &model, [0.3, 0.7, 0.0], [&[0.2], &[-0.5], &[0.9]]).unwrap();
        let d2 = det_combo2(&g, &model, 0.3, 0.7, &[0.2], &[-0.5]).unwrap();
        assert!((d3.ln_abs - d2.ln_abs).abs() < 1e-12);
        assert_eq!(d3.sign, d2.sign);
    }

    #[test]
    fn all_identical_thetas_combo3() {
        let (g, model) = setup();
        let d = det_combo3(&g, &model, [0.2, 0.5, 0.3], [&[0.1], &[0.1], &[0.1]]).unwrap();
        let expect = -ln_det_cov(&g, &model).unwrap();
        assert!((d.ln_abs - expect).abs() < 1e-12);
    }

    #[test]
    fn weight_sum_violation_rejected() {
        let (g, model) = setup();
        assert!(det_combo2(&g, &model, 0.5, 0.6, &[0.1], &[0.2]).is_err());
        assert!(det_combo3(&g, &model, [0.5, 0.5, 0.5], [&[0.1], &[0.2], &[0.3]]).is_err());
    }
}
