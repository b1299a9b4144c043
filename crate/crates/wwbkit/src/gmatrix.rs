//! Assembly of the moment matrix G from prior-integrated likelihood-ratio
//! moments.
//!
//! With one test point per parameter the matrix H is diagonal and every
//! element of G is a combination of six prior-integrated moments. The prior
//! integration itself splits into a closed multiplicative factor when the
//! observation moment does not depend on theta (always the case for a single
//! source with white noise) and a deterministic quadrature otherwise.

use crate::error::{Result, WwbError};
use crate::eta::{eta_prime_cov_ln, eta_prime_mean_ln, EtaArgs};
use crate::geometry::ArrayGeometry;
use crate::logdomain::{signed_log_sum, SignedLog};
use crate::prior::{support_intersection, Prior, PriorSpec};
use crate::signal::SignalModel;

/// Default node count per dimension for theta-dependent quadrature.
pub const DEFAULT_QUAD_NODES: usize = 512;

/// The q x q moment matrix together with the test points and exponents it
/// was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    pub entries: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub s: Vec<f64>,
}

impl GMatrix {
    pub fn q(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q();
        if self.s.len() != q || self.entries.len() != q {
            return Err(WwbError::Dimension("G matrix fields disagree on q".into()));
        }
        if self.h.iter().any(|&h| h == 0.0) {
            return Err(WwbError::Degenerate("test point h = 0".into()));
        }
        if self.s.iter().any(|&s| !(0.0 < s && s < 1.0)) {
            return Err(WwbError::Degenerate("exponent s outside (0,1)".into()));
        }
        for row in &self.entries {
            if row.len() != q || row.iter().any(|x| !x.is_finite()) {
                return Err(WwbError::Degenerate("non-finite G entry".into()));
            }
        }
        Ok(())
    }
}

/// Clipped length factor of one uniform prior dimension:
/// `|[a,b] n ([a,b]-u) n ([a,b]-v)| / (b-a)`, clamped at zero when the
/// intersection is empty. Reproduces the tabulated cases: `(b-a-|u|)/(b-a)`
/// for `v = 0` or `v = u`, `(b-a-2|u|)/(b-a)` for `v = -u`, and the product
/// of independent factors across distinct indices.
pub fn uniform_length_factor(a: f64, b: f64, u: f64, v: f64) -> f64 {
    match support_intersection(a, b, u, v) {
        Some((lo, hi)) => (hi - lo) / (b - a),
        None => 0.0,
    }
}

/// Log of the Gaussian prior factor of one dimension:
/// `-(alpha u^2 + beta v^2 - (alpha u + beta v)^2) / (2 sigma^2)`.
/// Reduces to the three tabulated cases (distinct indices, `v = u`,
/// `v = -u`).
pub fn gaussian_ln_factor(sigma2: f64, alpha: f64, beta: f64, u: f64, v: f64) -> f64 {
    let c = alpha * u + beta * v;
    -(alpha * u * u + beta * v * v - c * c) / (2.0 * sigma2)
}

/// Displacements that actually enter the prior integral: a zero exponent
/// means the corresponding density factor is absent entirely, so its shift
/// neither weights nor clips the integration region.
fn active_shifts(args: &EtaArgs) -> (Vec<f64>, Vec<f64>) {
    let u = if args.alpha == 0.0 {
        vec![0.0; args.u.len()]
    } else {
        args.u.clone()
    };
    let v = if args.beta == 0.0 {
        vec![0.0; args.v.len()]
    } else {
        args.v.clone()
    };
    (u, v)
}

/// Prior-integrated moment for all-uniform priors.
///
/// When `theta_independent` is set the moment is evaluated once at the prior
/// midpoint and multiplied by the clipped length factors; otherwise a
/// composite-trapezoid quadrature runs over the intersected region with
/// `quad_nodes` nodes per dimension. An empty intersection yields zero.
pub fn integrate_prior_uniform(
    eta_prime_ln: impl Fn(&[f64]) -> Result<f64>,
    prior: &PriorSpec,
    args: &EtaArgs,
    theta_independent: bool,
    quad_nodes: usize,
) -> Result<SignedLog> {
    if !prior.all_uniform() {
        return Err(WwbError::Prior(
            "integrate_prior_uniform needs uniform entries".into(),
        ));
    }
    let (u, v) = active_shifts(args);
    let mut regions = Vec::with_capacity(prior.len());
    for (k, p) in prior.entries.iter().enumerate() {
        let Prior::Uniform { a, b } = *p else { unreachable!() };
        match support_intersection(a, b, u[k], v[k]) {
            Some(r) => regions.push(r),
            None => return Ok(SignedLog::zero()),
        }
    }
    if theta_independent {
        let ln = eta_prime_ln(&prior.midpoint())?;
        let mut result = SignedLog::from_coeff_exp(1.0, ln);
        for (k, p) in prior.entries.iter().enumerate() {
            let Prior::Uniform { a, b } = *p else { unreachable!() };
            result = result.mul(SignedLog::from_value(uniform_length_factor(
                a, b, u[k], v[k],
            )));
        }
        Ok(result)
    } else {
        let integral_ln = trapezoid_ln(&eta_prime_ln, &regions, quad_nodes)?;
        let norm_ln: f64 = prior
            .entries
            .iter()
            .map(|p| {
                let Prior::Uniform { a, b } = *p else { unreachable!() };
                (b - a).ln()
            })
            .sum();
        Ok(SignedLog::from_coeff_exp(1.0, integral_ln - norm_ln))
    }
}

/// Prior-integrated moment for all-Gaussian priors; only defined for a
/// theta-independent moment (given as its natural log).
pub fn integrate_prior_gaussian(
    eta_prime_ln: f64,
    prior: &PriorSpec,
    args: &EtaArgs,
) -> Result<SignedLog> {
    let mut ln = eta_prime_ln;
    for (k, p) in prior.entries.iter().enumerate() {
        let Prior::Gaussian { sigma2, .. } = *p else {
            return Err(WwbError::Prior(
                "integrate_prior_gaussian needs gaussian entries".into(),
            ));
        };
        ln += gaussian_ln_factor(sigma2, args.alpha, args.beta, args.u[k], args.v[k]);
    }
    Ok(SignedLog::from_coeff_exp(1.0, ln))
}

/// Streaming log-domain composite trapezoid over a box region.
fn trapezoid_ln(
    f_ln: &impl Fn(&[f64]) -> Result<f64>,
    regions: &[(f64, f64)],
    nodes: usize,
) -> Result<f64> {
    assert!(nodes >= 2);
    let q = regions.len();
    let steps: Vec<f64> = regions
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (nodes - 1) as f64)
        .collect();
    let ln_step: f64 = steps.iter().map(|s| s.ln()).sum();

    let mut idx = vec![0usize; q];
    let mut theta = vec![0.0; q];
    let mut max_ln = f64::NEG_INFINITY;
    let mut acc = 0.0f64;
    loop {
        let mut w_ln = ln_step;
        for k in 0..q {
            theta[k] = regions[k].0 + idx[k] as f64 * steps[k];
            if idx[k] == 0 || idx[k] == nodes - 1 {
                w_ln += 0.5f64.ln();
            }
        }
        let t = f_ln(&theta)? + w_ln;
        if t.is_finite() || t == f64::NEG_INFINITY {
            if t <= max_ln {
                acc += (t - max_ln).exp();
            } else {
                acc = acc * (max_ln - t).exp() + 1.0;
                max_ln = t;
            }
        }
        // advance the multi-index
        let mut k = 0;
        loop {
            if k == q {
                return Ok(max_ln + acc.ln());
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

/// One element of G from a prior-integrated moment evaluator:
///
/// `[eta(s_k,s_l,h_k,h_l) + eta(1-s_k,1-s_l,-h_k,-h_l)
///   - eta(s_k,1-s_l,h_k,-h_l) - eta(1-s_k,s_l,-h_k,h_l)]
///  / [eta(s_k,0,h_k,0) eta(0,s_l,0,h_l)]`.
pub fn assemble_g_element(
    k: usize,
    l: usize,
    s: &[f64],
    h: &[f64],
    eta: &impl Fn(f64, f64, &[f64], &[f64]) -> Result<SignedLog>,
) -> Result<f64> {
    let q = h.len();
    let basis = |i: usize, val: f64| -> Vec<f64> {
        let mut e = vec![0.0; q];
        e[i] = val;
        e
    };
    let zero = vec![0.0; q];
    let (sk, sl) = (s[k], s[l]);
    let (hk, hl) = (h[k], h[l]);

    let t1 = eta(sk, sl, &basis(k, hk), &basis(l, hl))?;
    let t2 = eta(1.0 - sk, 1.0 - sl, &basis(k, -hk), &basis(l, -hl))?;
    let t3 = eta(sk, 1.0 - sl, &basis(k, hk), &basis(l, -hl))?;
    let t4 = eta(1.0 - sk, sl, &basis(k, -hk), &basis(l, hl))?;
    let d1 = eta(sk, 0.0, &basis(k, hk), &zero)?;
    let d2 = eta(0.0, sl, &zero, &basis(l, hl))?;

    let num = signed_log_sum(&[t1, t2, t3.neg(), t4.neg()]);
    let den = d1.mul(d2);
    if den.is_zero() || den.sign < 0.0 {
        return Err(WwbError::Degenerate(
            "G element denominator is not positive".into(),
        ));
    }
    Ok(num.div(den).value())
}

/// Full general-engine G matrix for either model.
///
/// Single-source configurations use the theta-independent closed prior
/// factors; anything theta-dependent requires all-uniform priors and falls
/// back to quadrature.
pub fn g_matrix(
    geometry: &ArrayGeometry,
    model: &SignalModel,
    prior: &PriorSpec,
    h: &[f64],
    s: &[f64],
    quad_nodes: usize,
) -> Result<GMatrix> {
    let q = prior.len();
    if h.len() != q || s.len() != q {
        return Err(WwbError::Dimension(format!(
            "h and s must have {q} entries"
        )));
    }
    if h.iter().any(|&x| x == 0.0) {
        return Err(WwbError::Degenerate("test point h = 0".into()));
    }
    if s.iter().any(|&x| !(0.0 < x && x < 1.0)) {
        return Err(WwbError::Degenerate("exponent s outside (0,1)".into()));
    }
    let theta_independent = q == geometry.params_per_source();

    let eta = |alpha: f64, beta: f64, u: &[f64], v: &[f64]| -> Result<SignedLog> {
        let args = EtaArgs::new(alpha, beta, u.to_vec(), v.to_vec())?;
        let moment_ln = |theta: &[f64]| -> Result<f64> {
            match model {
                SignalModel::Unconditional { .. } => {
                    eta_prime_cov_ln(&args, theta, geometry, model)
                }
                SignalModel::Conditional { .. } => {
                    eta_prime_mean_ln(&args, theta, geometry, model)
                }
            }
        };
        if theta_independent {
            let ln = moment_ln(&prior.midpoint())?;
            let (u, v) = active_shifts(&args);
            let mut result = SignedLog::from_coeff_exp(1.0, ln);
            for (k, p) in prior.entries.iter().enumerate() {
                match *p {
                    Prior::Uniform { a, b } => {
                        result = result
                            .mul(SignedLog::from_value(uniform_length_factor(a, b, u[k], v[k])));
                    }
                    Prior::Gaussian { sigma2, .. } => {
                        result = result.mul(SignedLog::from_coeff_exp(
                            1.0,
                            gaussian_ln_factor(sigma2, alpha, beta, u[k], v[k]),
                        ));
                    }
                }
            }
            Ok(result)
        } else {
            integrate_prior_uniform(moment_ln, prior, &args, false, quad_nodes)
        }
    };

    let mut entries = vec![vec![0.0; q]; q];
    for k in 0..q {
        for l in k..q {
            let val = assemble_g_element(k, l, s, h, &eta)?;
            entries[k][l] = val;
            entries[l][k] = val;
        }
    }
    let g = GMatrix {
        entries,
        h: h.to_vec(),
        s: s.to_vec(),
    };
    g.validate()?;
    Ok(g)
}
