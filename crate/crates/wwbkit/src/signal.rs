//! Source signal models and observation covariance.
//!
//! Two Gaussian observation models are supported:
//!
//! * unconditional (stochastic): the source samples are zero-mean circular
//!   complex Gaussian with known power, so the direction parameters enter
//!   the observation covariance `R_y(theta) = sigma_s^2 a a^H + sigma_n^2 I`;
//! * conditional (deterministic): the source waveform is known, so the
//!   direction parameters enter the observation mean `a(theta) s(t)` and the
//!   covariance is the noise covariance `sigma_n^2 I`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WwbError};
use crate::geometry::{steering_vector, ArrayGeometry};

/// Signal model plus noise level; owns the snapshot count `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SignalModel {
    /// Zero-mean circular Gaussian source of power `sigma_s2`.
    Unconditional {
        sigma_s2: f64,
        sigma_n2: f64,
        snapshots: usize,
    },
    /// Known deterministic waveforms, one per source (single entry in the
    /// single-source scenarios; extra entries only feed the multi-source
    /// moment machinery). All waveforms share the snapshot count.
    Conditional {
        waveforms: Vec<Vec<Complex64>>,
        sigma_n2: f64,
    },
}

impl SignalModel {
    pub fn unconditional(sigma_s2: f64, sigma_n2: f64, snapshots: usize) -> Result<Self> {
        let m = SignalModel::Unconditional {
            sigma_s2,
            sigma_n2,
            snapshots,
        };
        m.validate()?;
        Ok(m)
    }

    /// Single-source conditional model with a known waveform.
    pub fn conditional(waveform: Vec<Complex64>, sigma_n2: f64) -> Result<Self> {
        let m = SignalModel::Conditional {
            waveforms: vec![waveform],
            sigma_n2,
        };
        m.validate()?;
        Ok(m)
    }

    /// Conditional model with constant unit-amplitude samples scaled to a
    /// given per-snapshot energy `amp2 = |s(t)|^2`.
    pub fn conditional_constant(amp2: f64, sigma_n2: f64, snapshots: usize) -> Result<Self> {
        let s = Complex64::new(amp2.sqrt(), 0.0);
        Self::conditional(vec![s; snapshots], sigma_n2)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SignalModel::Unconditional {
                sigma_s2,
                sigma_n2,
                snapshots,
            } => {
                if !(*sigma_s2 > 0.0) || !sigma_s2.is_finite() {
                    return Err(WwbError::Model(format!(
                        "sigma_s2 must be strictly positive, got {sigma_s2}"
                    )));
                }
                if !(*sigma_n2 > 0.0) || !sigma_n2.is_finite() {
                    return Err(WwbError::Model(format!(
                        "sigma_n2 must be strictly positive, got {sigma_n2}"
                    )));
                }
                if *snapshots == 0 {
                    return Err(WwbError::Model("snapshots must be >= 1".into()));
                }
            }
            SignalModel::Conditional {
                waveforms,
                sigma_n2,
            } => {
                if !(*sigma_n2 > 0.0) || !sigma_n2.is_finite() {
                    return Err(WwbError::Model(format!(
                        "sigma_n2 must be strictly positive, got {sigma_n2}"
                    )));
                }
                if waveforms.is_empty() || waveforms.iter().any(|w| w.is_empty()) {
                    return Err(WwbError::Model("conditional waveform is empty".into()));
                }
                let t = waveforms[0].len();
                if waveforms.iter().any(|w| w.len() != t) {
                    return Err(WwbError::Model(
                        "conditional waveforms have unequal lengths".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn snapshots(&self) -> usize {
        match self {
            SignalModel::Unconditional { snapshots, .. } => *snapshots,
            SignalModel::Conditional { waveforms, .. } => waveforms[0].len(),
        }
    }

    pub fn sigma_n2(&self) -> f64 {
        match self {
            SignalModel::Unconditional { sigma_n2, .. } => *sigma_n2,
            SignalModel::Conditional { sigma_n2, .. } => *sigma_n2,
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self, SignalModel::Conditional { .. })
    }

    /// `U_SNR = sigma_s^4 / (sigma_n^2 (M sigma_s^2 + sigma_n^2))`, the scalar
    /// SNR functional of the unconditional closed forms.
    pub fn u_snr(&self, m: usize) -> Result<f64> {
        match self {
            SignalModel::Unconditional {
                sigma_s2, sigma_n2, ..
            } => Ok(sigma_s2 * sigma_s2 / (sigma_n2 * (m as f64 * sigma_s2 + sigma_n2))),
            _ => Err(WwbError::Model("u_snr needs the unconditional model".into())),
        }
    }

    /// `C_SNR = (1/sigma_n^2) sum_t |s(t)|^2`, the scalar SNR functional of
    /// the conditional closed forms (first waveform).
    pub fn c_snr(&self) -> Result<f64> {
        match self {
            SignalModel::Conditional {
                waveforms,
                sigma_n2,
            } => Ok(waveforms[0].iter().map(|s| s.norm_sqr()).sum::<f64>() / sigma_n2),
            _ => Err(WwbError::Model("c_snr needs the conditional model".into())),
        }
    }

    pub fn waveforms(&self) -> Result<&[Vec<Complex64>]> {
        match self {
            SignalModel::Conditional { waveforms, .. } => Ok(waveforms),
            _ => Err(WwbError::Model(
                "waveforms need the conditional model".into(),
            )),
        }
    }

    /// Cross-energy matrix `E[m][n] = sum_t s_m(t)^* s_n(t)` of the source
    /// waveforms.
    pub fn waveform_cross_energy(&self) -> Result<Vec<Vec<Complex64>>> {
        let w = self.waveforms()?;
        let n = w.len();
        let mut e = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (m, wm) in w.iter().enumerate() {
            for (k, wk) in w.iter().enumerate() {
                e[m][k] = wm.iter().zip(wk).map(|(a, b)| a.conj() * b).sum();
            }
        }
        Ok(e)
    }
}

/// Single-source observation covariance
/// `R_y(theta) = sigma_s^2 a(theta) a^H(theta) + sigma_n^2 I`, Hermitian
/// positive definite with eigenvalues `sigma_n^2` (multiplicity M-1) and
/// `M sigma_s^2 + sigma_n^2`.
pub fn observation_covariance(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    theta: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let SignalModel::Unconditional {
        sigma_s2, sigma_n2, ..
    } = model
    else {
        return Err(WwbError::Model(
            "observation_covariance needs the unconditional model".into(),
        ));
    };
    let a = steering_vector(geometry, theta)?;
    let m = a.len();
    let mut r = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for i in 0..m {
        for j in 0..m {
            r[i][j] = sigma_s2 * a[i] * a[j].conj();
        }
        r[i][i] += sigma_n2;
    }
    Ok(r)
}
