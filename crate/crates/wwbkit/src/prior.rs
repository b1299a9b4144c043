//! Per-parameter priors.
//!
//! Parameters are statistically independent, so the joint prior is the
//! product of the per-parameter densities.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WwbError};

/// Prior of one direction parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Prior {
    Uniform { a: f64, b: f64 },
    Gaussian { mu: f64, sigma2: f64 },
}

impl Prior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Prior::Uniform { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(WwbError::Prior(format!(
                        "uniform prior needs a < b, got [{a}, {b}]"
                    )));
                }
            }
            Prior::Gaussian { mu, sigma2 } => {
                if !(sigma2 > 0.0) || !sigma2.is_finite() || !mu.is_finite() {
                    return Err(WwbError::Prior(format!(
                        "gaussian prior needs sigma2 > 0, got mu={mu}, sigma2={sigma2}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Natural log of the density at `x` (`-inf` outside a uniform support).
    pub fn ln_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Uniform { a, b } => {
                if x >= a && x <= b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Gaussian { mu, sigma2 } => {
                -0.5 * (x - mu) * (x - mu) / sigma2
                    - 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln()
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Prior::Uniform { a, b } => x >= a && x <= b,
            Prior::Gaussian { .. } => true,
        }
    }

    pub fn midpoint(&self) -> f64 {
        match *self {
            Prior::Uniform { a, b } => 0.5 * (a + b),
            Prior::Gaussian { mu, .. } => mu,
        }
    }
}

/// Joint prior: one entry per direction parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub entries: Vec<Prior>,
}

impl PriorSpec {
    pub fn new(entries: Vec<Prior>) -> Result<Self> {
        if entries.is_empty() {
            return Err(WwbError::Prior("no prior entries".into()));
        }
        for e in &entries {
            e.validate()?;
        }
        Ok(PriorSpec { entries })
    }

    /// Uniform over [-1, 1] on each of `q` parameters (the direction-cosine
    /// support of a planar array).
    pub fn uniform_unit(q: usize) -> Self {
        PriorSpec {
            entries: vec![Prior::Uniform { a: -1.0, b: 1.0 }; q],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.entries.len()
            && theta.iter().zip(&self.entries).all(|(&x, p)| p.contains(x))
    }

    pub fn all_uniform(&self) -> bool {
        self.entries.iter().all(|p| matches!(p, Prior::Uniform { .. }))
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.entries.iter().map(|p| p.midpoint()).collect()
    }
}

/// Intersection of `[a, b]`, `[a, b] - u` and `[a, b] - v`: the set of
/// `theta` where the prior, the `theta+u` shift and the `theta+v` shift are
/// all inside the support. Returns `None` when empty.
///
/// This single rule reproduces all the interval cases of the uniform-prior
/// integration: distinct indices, `v = u`, and `v = -u`.
pub fn support_intersection(a: f64, b: f64, u: f64, v: f64) -> Option<(f64, f64)> {
    let lo = a.max(a - u).max(a - v);
    let hi = b.min(b - u).min(b - v);
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_cases_match_interval_rules() {
        // positive shift: [a, b-u]
        assert_eq!(support_intersection(-1.0, 1.0, 0.4, 0.0), Some((-1.0, 0.6)));
        // negative shift: [a-u, b]
        assert_eq!(support_intersection(-1.0, 1.0, -0.4, 0.0), Some((-0.6, 1.0)));
        // v = -u: [a+u, b-u]
        assert_eq!(support_intersection(-1.0, 1.0, 0.4, -0.4), Some((-0.6, 0.6)));
        // v = u: same as single shift
        assert_eq!(support_intersection(-1.0, 1.0, 0.4, 0.4), Some((-1.0, 0.6)));
        // |u| = 1.2 with v = -u: empty
        assert_eq!(support_intersection(-1.0, 1.0, 1.2, -1.2), None);
    }

    #[test]
    fn invalid_priors_rejected() {
        assert!(Prior::Uniform { a: 1.0, b: 1.0 }.validate().is_err());
        assert!(Prior::Uniform { a: 2.0, b: -2.0 }.validate().is_err());
        assert!(Prior::Gaussian { mu: 0.0, sigma2: 0.0 }.validate().is_err());
    }

    #[test]
    fn membership() {
        let p = PriorSpec::uniform_unit(2);
        assert!(p.contains(&[0.3, -0.9]));
        assert!(!p.contains(&[1.2, 0.0]));
        assert!(!p.contains(&[0.3]));
    }
}
