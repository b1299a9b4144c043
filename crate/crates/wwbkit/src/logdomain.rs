//! Signed log-domain arithmetic.
//!
//! Bound evaluation raises determinants and exponentials to the power of the
//! snapshot count, so intermediate magnitudes routinely leave the f64 range.
//! Every quantity that can do so is carried as `sign * exp(ln_abs)` and only
//! collapsed to a linear value at the very end.

/// A real number represented as `sign * exp(ln_abs)`.
///
/// `sign` is -1, 0 or +1; a zero value is stored as `(f64::NEG_INFINITY, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: f64,
}

impl SignedLog {
    pub fn zero() -> Self {
        SignedLog {
            ln_abs: f64::NEG_INFINITY,
            sign: 0.0,
        }
    }

    pub fn one() -> Self {
        SignedLog {
            ln_abs: 0.0,
            sign: 1.0,
        }
    }

    /// Encode a linear-domain value.
    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            SignedLog {
                ln_abs: x.abs().ln(),
                sign: x.signum(),
            }
        }
    }

    /// Encode `coeff * exp(exponent)` without evaluating the exponential.
    pub fn from_coeff_exp(coeff: f64, exponent: f64) -> Self {
        if coeff == 0.0 {
            Self::zero()
        } else {
            SignedLog {
                ln_abs: coeff.abs().ln() + exponent,
                sign: coeff.signum(),
            }
        }
    }

    /// Collapse to a linear value; may overflow to +/-inf or underflow to 0.
    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn neg(self) -> Self {
        SignedLog {
            ln_abs: self.ln_abs,
            sign: -self.sign,
        }
    }

    pub fn mul(self, other: SignedLog) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        SignedLog {
            ln_abs: self.ln_abs + other.ln_abs,
            sign: self.sign * other.sign,
        }
    }

    pub fn div(self, other: SignedLog) -> Self {
        SignedLog {
            ln_abs: self.ln_abs - other.ln_abs,
            sign: self.sign * other.sign,
        }
    }

    /// Raise to a real power; only valid for non-negative values.
    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return if p == 0.0 { Self::one() } else { Self::zero() };
        }
        debug_assert!(self.sign > 0.0, "powf of a negative log-domain value");
        SignedLog {
            ln_abs: self.ln_abs * p,
            sign: 1.0,
        }
    }
}

/// Sum of signed log-domain terms, computed by factoring out the largest
/// magnitude so the residual sum stays in range.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    let max_ln = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_ln == f64::NEG_INFINITY {
        return SignedLog::zero();
    }
    let mut acc = 0.0;
    for t in terms {
        if !t.is_zero() {
            acc += t.sign * (t.ln_abs - max_ln).exp();
        }
    }
    if acc == 0.0 {
        SignedLog::zero()
    } else {
        SignedLog {
            ln_abs: max_ln + acc.abs().ln(),
            sign: acc.signum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_linear_values() {
        for &x in &[1.0, -2.5, 1e-200, -3e180, 0.0] {
            let v = SignedLog::from_value(x).value();
            assert!((v - x).abs() <= x.abs() * 1e-13);
        }
    }

    #[test]
    fn sums_across_huge_ranges() {
        // exp(1000) - exp(1000) + exp(990) stays finite and exact in ratio.
        let terms = [
            SignedLog::from_coeff_exp(1.0, 1000.0),
            SignedLog::from_coeff_exp(-1.0, 1000.0),
            SignedLog::from_coeff_exp(2.0, 990.0),
        ];
        let s = signed_log_sum(&terms);
        assert!((s.ln_abs - (990.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(s.sign, 1.0);
    }

    #[test]
    fn cancellation_to_zero() {
        let terms = [
            SignedLog::from_value(3.0),
            SignedLog::from_value(-3.0),
        ];
        assert!(signed_log_sum(&terms).is_zero());
    }
}
