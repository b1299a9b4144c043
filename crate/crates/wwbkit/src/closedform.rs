//! Single-source closed-form G elements and bounds for planar and linear
//! arrays, for both signal models, with general exponents and the s = 1/2
//! fast paths.
//!
//! The prior is hard-coded to uniform over [-1, 1] per direction-cosine
//! parameter; those support lengths are baked into the `(1 - |h|/2)` and
//! `(1 - |h|)` factors. Other priors go through the general engine.
//!
//! Every `(...)^(-T)` power and every `exp(C_SNR * ...)` factor is handled in
//! log domain with the largest exponent factored out before numerator terms
//! are subtracted; raw evaluation overflows as soon as `T` or the SNR grows.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Result, WwbError};
use crate::geometry::ArrayGeometry;
use crate::gmatrix::GMatrix;
use crate::logdomain::{signed_log_sum, SignedLog};
use crate::signal::SignalModel;

/// Shared steering kernel `sum_k exp(-j 2 pi (dx_k cu + dy_k cv))`;
/// `|result| <= M`.
pub fn steering_sum(geometry: &ArrayGeometry, cu: f64, cv: f64) -> Complex64 {
    geometry
        .sensors()
        .iter()
        .map(|&(dx, dy)| Complex64::from_polar(1.0, -TAU * (dx * cu + dy * cv)))
        .sum()
}

/// Inputs of the planar closed forms: geometry, model, one test point and
/// one exponent per direction cosine. Prior support is [-1, 1] per
/// parameter.
#[derive(Debug, Clone)]
pub struct PlanarBoundInputs<'a> {
    pub geometry: &'a ArrayGeometry,
    pub model: &'a SignalModel,
    pub h_u: f64,
    pub h_v: f64,
    pub s_u: f64,
    pub s_v: f64,
}

impl<'a> PlanarBoundInputs<'a> {
    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h_u", self.h_u), ("h_v", self.h_v)] {
            if h == 0.0 {
                return Err(WwbError::Degenerate(format!("{name} = 0")));
            }
            if !(h.abs() < 2.0) {
                return Err(WwbError::Degenerate(format!(
                    "|{name}| must be below the support length 2, got {h}"
                )));
            }
        }
        for (name, s) in [("s_u", self.s_u), ("s_v", self.s_v)] {
            if !(0.0 < s && s < 1.0) {
                return Err(WwbError::Degenerate(format!(
                    "{name} must lie in (0,1), got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Uniform [-1,1] length factor for the matched-shift moment terms.
fn lf_half(h: f64) -> f64 {
    1.0 - h.abs() / 2.0
}

/// Uniform [-1,1] length factor for the opposed-shift moment term, clamped
/// at zero once |h| exceeds 1 and the integration region empties.
fn lf_full(h: f64) -> f64 {
    (1.0 - h.abs()).max(0.0)
}

fn ln_pos(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln())
    } else {
        Err(WwbError::InvalidRegion(format!(
            "{what} is non-positive ({x:.6e})"
        )))
    }
}

// ---------------------------------------------------------------------------
// Unconditional model
// ---------------------------------------------------------------------------

struct SumSet {
    d_a: f64,  // M^2 - |sum over first axis, step h|^2
    d_a2: f64, // M^2 - |sum over first axis, step 2h|^2
    d_b: f64,
    d_m: f64, // difference combination (dx h_u - dy h_v)
    d_p: f64, // sum combination (dx h_u + dy h_v)
    s_a: Complex64,
    s_b: Complex64,
    s_m: Complex64,
    s_p: Complex64,
}

fn sums(geometry: &ArrayGeometry, h_u: f64, h_v: f64) -> (SumSet, SumSet) {
    let m2 = (geometry.len() as f64).powi(2);
    let s_u = steering_sum(geometry, h_u, 0.0);
    let s_u2 = steering_sum(geometry, 2.0 * h_u, 0.0);
    let s_v = steering_sum(geometry, 0.0, h_v);
    let s_v2 = steering_sum(geometry, 0.0, 2.0 * h_v);
    let s_m = steering_sum(geometry, h_u, -h_v);
    let s_p = steering_sum(geometry, h_u, h_v);
    let for_u = SumSet {
        d_a: m2 - s_u.norm_sqr(),
        d_a2: m2 - s_u2.norm_sqr(),
        d_b: m2 - s_v.norm_sqr(),
        d_m: m2 - s_m.norm_sqr(),
        d_p: m2 - s_p.norm_sqr(),
        s_a: s_u,
        s_b: s_v,
        s_m,
        s_p,
    };
    let for_v = SumSet {
        d_a: m2 - s_v.norm_sqr(),
        d_a2: m2 - s_v2.norm_sqr(),
        d_b: m2 - s_u.norm_sqr(),
        d_m: m2 - s_m.norm_sqr(),
        d_p: m2 - s_p.norm_sqr(),
        s_a: s_v,
        s_b: s_u,
        s_m,
        s_p,
    };
    (for_u, for_v)
}

/// Diagonal entry of the unconditional planar G, general exponent.
fn uncond_diag_general(h: f64, s: f64, d1: f64, d2: f64, u_snr: f64, t: f64) -> Result<f64> {
    let x1 = ln_pos(1.0 + 2.0 * s * (1.0 - 2.0 * s) * u_snr * d1, "moment bracket")?;
    let x2 = ln_pos(
        1.0 + 2.0 * (1.0 - s) * (2.0 * s - 1.0) * u_snr * d1,
        "moment bracket",
    )?;
    let x3 = ln_pos(1.0 + s * (1.0 - s) * u_snr * d2, "moment bracket")?;
    let xd = ln_pos(1.0 + s * (1.0 - s) * u_snr * d1, "moment bracket")?;
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(lf_half(h), -t * x1),
        SignedLog::from_coeff_exp(lf_half(h), -t * x2),
        SignedLog::from_coeff_exp(-2.0 * lf_full(h), -t * x3),
    ]);
    let den = SignedLog::from_coeff_exp(lf_half(h) * lf_half(h), -2.0 * t * xd);
    Ok(num.div(den).value())
}

/// Diagonal entry, s = 1/2 simplified form.
fn uncond_diag_half(h: f64, d1: f64, d2: f64, u_snr: f64, t: f64) -> Result<f64> {
    let x3 = ln_pos(1.0 + u_snr / 4.0 * d2, "moment bracket")?;
    let xd = ln_pos(1.0 + u_snr / 4.0 * d1, "moment bracket")?;
    let num = signed_log_sum(&[
        SignedLog::from_value(2.0 * lf_half(h)),
        SignedLog::from_coeff_exp(-2.0 * lf_full(h), -t * x3),
    ]);
    let den = SignedLog::from_coeff_exp(lf_half(h) * lf_half(h), -2.0 * t * xd);
    Ok(num.div(den).value())
}

/// Cross entry of the unconditional planar G, general exponents.
#[allow(clippy::too_many_arguments)]
fn uncond_cross_general(
    su: &SumSet,
    s_u: f64,
    s_v: f64,
    m: f64,
    u_snr: f64,
    ratio_n_s: f64, // sigma_n^2 / sigma_s^2
    t: f64,
) -> Result<f64> {
    let (sa, sb, sm, sp) = (su.s_a, su.s_b, su.s_m, su.s_p);
    let (d_u, d_v, d_m, d_p) = (su.d_a, su.d_b, su.d_m, su.d_p);
    let kappa = u_snr * u_snr * ratio_n_s;
    // triple-product blocks shared by the matched- and opposed-sign terms
    let w_m = 2.0 * (sb.conj() * sa * sm.conj()).re
        - m * (sb.norm_sqr() + sa.norm_sqr() + sm.norm_sqr())
        + m * m * m;
    let w_p = 2.0 * (sb.conj() * sa.conj() * sp).re
        - m * (sb.norm_sqr() + sa.norm_sqr() + sp.norm_sqr())
        + m * m * m;

    let c3 = 1.0 - s_u - s_v;
    let x1 = 1.0 + u_snr * (s_u * s_v * d_m + s_u * c3 * d_u + s_v * c3 * d_v)
        - s_u * s_v * c3 * kappa * w_m;
    let x2 = 1.0
        + u_snr
            * ((1.0 - s_u) * (1.0 - s_v) * d_m
                - (1.0 - s_u) * c3 * d_u
                - (1.0 - s_v) * c3 * d_v)
        + (1.0 - s_u) * (1.0 - s_v) * c3 * kappa * w_m;
    let ds = s_v - s_u;
    let x3 = 1.0
        + u_snr * (s_u * (1.0 - s_v) * d_p + s_u * ds * d_u + (1.0 - s_v) * ds * d_v)
        - s_u * (1.0 - s_v) * ds * kappa * w_p;
    let x4 = 1.0
        + u_snr * (s_v * (1.0 - s_u) * d_p - (1.0 - s_u) * ds * d_u - s_v * ds * d_v)
        + s_v * (1.0 - s_u) * ds * kappa * w_p;

    let xd_u = ln_pos(1.0 + s_u * (1.0 - s_u) * u_snr * d_u, "moment bracket")?;
    let xd_v = ln_pos(1.0 + s_v * (1.0 - s_v) * u_snr * d_v, "moment bracket")?;
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(1.0, -t * ln_pos(x1, "moment bracket")?),
        SignedLog::from_coeff_exp(1.0, -t * ln_pos(x2, "moment bracket")?),
        SignedLog::from_coeff_exp(-1.0, -t * ln_pos(x3, "moment bracket")?),
        SignedLog::from_coeff_exp(-1.0, -t * ln_pos(x4, "moment bracket")?),
    ]);
    let den = SignedLog::from_coeff_exp(1.0, -t * (xd_u + xd_v));
    Ok(num.div(den).value())
}

/// Cross entry, s = 1/2 simplified form.
fn uncond_cross_half(su: &SumSet, u_snr: f64, t: f64) -> Result<f64> {
    let (d_u, d_v, d_m, d_p) = (su.d_a, su.d_b, su.d_m, su.d_p);
    let xm = ln_pos(1.0 + u_snr / 4.0 * d_m, "moment bracket")?;
    let xp = ln_pos(1.0 + u_snr / 4.0 * d_p, "moment bracket")?;
    let xd_u = ln_pos(1.0 + u_snr / 4.0 * d_u, "moment bracket")?;
    let xd_v = ln_pos(1.0 + u_snr / 4.0 * d_v, "moment bracket")?;
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(2.0, -t * xm),
        SignedLog::from_coeff_exp(-2.0, -t * xp),
    ]);
    let den = SignedLog::from_coeff_exp(1.0, -t * (xd_u + xd_v));
    Ok(num.div(den).value())
}

/// Unconditional planar 2x2 G. Dispatches to the simplified expressions when
/// both exponents are exactly 1/2; the two paths agree to rounding.
pub fn planar_g_uncond(inputs: &PlanarBoundInputs) -> Result<GMatrix> {
    if inputs.s_u == 0.5 && inputs.s_v == 0.5 {
        planar_g_uncond_path(inputs, true)
    } else {
        planar_g_uncond_path(inputs, false)
    }
}

/// General-exponent path, usable at any valid (s_u, s_v) including 1/2.
pub fn planar_g_uncond_general(inputs: &PlanarBoundInputs) -> Result<GMatrix> {
    planar_g_uncond_path(inputs, false)
}

fn planar_g_uncond_path(inputs: &PlanarBoundInputs, half: bool) -> Result<GMatrix> {
    inputs.validate()?;
    let SignalModel::Unconditional {
        sigma_s2, sigma_n2, ..
    } = inputs.model
    else {
        return Err(WwbError::Model(
            "planar_g_uncond needs the unconditional model".into(),
        ));
    };
    let g = inputs.geometry;
    let m = g.len() as f64;
    let t = inputs.model.snapshots() as f64;
    let u_snr = inputs.model.u_snr(g.len())?;
    let (for_u, for_v) = sums(g, inputs.h_u, inputs.h_v);

    let (guu, gvv, guv) = if half {
        (
            uncond_diag_half(inputs.h_u, for_u.d_a, for_u.d_a2, u_snr, t)?,
            uncond_diag_half(inputs.h_v, for_v.d_a, for_v.d_a2, u_snr, t)?,
            uncond_cross_half(&for_u, u_snr, t)?,
        )
    } else {
        (
            uncond_diag_general(inputs.h_u, inputs.s_u, for_u.d_a, for_u.d_a2, u_snr, t)?,
            uncond_diag_general(inputs.h_v, inputs.s_v, for_v.d_a, for_v.d_a2, u_snr, t)?,
            uncond_cross_general(
                &for_u,
                inputs.s_u,
                inputs.s_v,
                m,
                u_snr,
                sigma_n2 / sigma_s2,
                t,
            )?,
        )
    };
    let g = GMatrix {
        entries: vec![vec![guu, guv], vec![guv, gvv]],
        h: vec![inputs.h_u, inputs.h_v],
        s: vec![inputs.s_u, inputs.s_v],
    };
    g.validate()?;
    Ok(g)
}

// ---------------------------------------------------------------------------
// Conditional model
// ---------------------------------------------------------------------------

struct CosSet {
    a_u: f64,  // M - sum cos(2 pi dx h_u)
    a_u2: f64, // M - sum cos(4 pi dx h_u)
    a_v: f64,
    a_v2: f64,
    a_m: f64, // M - sum cos(2 pi (dx h_u - dy h_v))
    a_p: f64, // M - sum cos(2 pi (dx h_u + dy h_v))
}

fn cos_sums(geometry: &ArrayGeometry, h_u: f64, h_v: f64) -> CosSet {
    let m = geometry.len() as f64;
    CosSet {
        a_u: m - steering_sum(geometry, h_u, 0.0).re,
        a_u2: m - steering_sum(geometry, 2.0 * h_u, 0.0).re,
        a_v: m - steering_sum(geometry, 0.0, h_v).re,
        a_v2: m - steering_sum(geometry, 0.0, 2.0 * h_v).re,
        a_m: m - steering_sum(geometry, h_u, -h_v).re,
        a_p: m - steering_sum(geometry, h_u, h_v).re,
    }
}

/// Diagonal entry of the conditional planar G, general exponent.
fn cond_diag_general(h: f64, s: f64, a1: f64, a2: f64, c: f64, _t: f64) -> Result<f64> {
    let e1 = 4.0 * s * (2.0 * s - 1.0) * c * a1;
    let e2 = 4.0 * (2.0 * s - 1.0) * (s - 1.0) * c * a1;
    let e3 = 2.0 * s * (s - 1.0) * c * a2;
    let e_den = 4.0 * s * (s - 1.0) * c * a1;
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(lf_half(h), e1),
        SignedLog::from_coeff_exp(lf_half(h), e2),
        SignedLog::from_coeff_exp(-2.0 * lf_full(h), e3),
    ]);
    let den = SignedLog::from_coeff_exp(lf_half(h) * lf_half(h), e_den);
    Ok(num.div(den).value())
}

fn cond_diag_half(h: f64, a1: f64, a2: f64, c: f64) -> Result<f64> {
    let num = signed_log_sum(&[
        SignedLog::from_value(2.0 * lf_half(h)),
        SignedLog::from_coeff_exp(-2.0 * lf_full(h), -0.5 * c * a2),
    ]);
    let den = SignedLog::from_coeff_exp(lf_half(h) * lf_half(h), -c * a1);
    Ok(num.div(den).value())
}

fn cond_cross_general(cs: &CosSet, s_u: f64, s_v: f64, c: f64) -> Result<f64> {
    let (a_u, a_v, a_m, a_p) = (cs.a_u, cs.a_v, cs.a_m, cs.a_p);
    let c3 = s_u + s_v - 1.0;
    let e1 = 2.0 * s_u * c3 * c * a_u + 2.0 * s_v * c3 * c * a_v - 2.0 * s_u * s_v * c * a_m;
    let e2 = 2.0 * (s_u - 1.0) * c3 * c * a_u + 2.0 * (s_v - 1.0) * c3 * c * a_v
        - 2.0 * (1.0 - s_u) * (1.0 - s_v) * c * a_m;
    let ds = s_u - s_v;
    let e3 = 2.0 * s_u * ds * c * a_u + 2.0 * (1.0 - s_v) * ds * c * a_v
        + 2.0 * s_u * (s_v - 1.0) * c * a_p;
    let e4 = 2.0 * (s_u - 1.0) * ds * c * a_u - 2.0 * s_v * ds * c * a_v
        + 2.0 * (s_u - 1.0) * s_v * c * a_p;
    let e_den = 2.0 * s_u * (s_u - 1.0) * c * a_u + 2.0 * s_v * (s_v - 1.0) * c * a_v;
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(1.0, e1),
        SignedLog::from_coeff_exp(1.0, e2),
        SignedLog::from_coeff_exp(-1.0, e3),
        SignedLog::from_coeff_exp(-1.0, e4),
    ]);
    let den = SignedLog::from_coeff_exp(1.0, e_den);
    Ok(num.div(den).value())
}

fn cond_cross_half(cs: &CosSet, c: f64) -> Result<f64> {
    let num = signed_log_sum(&[
        SignedLog::from_coeff_exp(2.0, -0.5 * c * cs.a_m),
        SignedLog::from_coeff_exp(-2.0, -0.5 * c * cs.a_p),
    ]);
    let den = SignedLog::from_coeff_exp(1.0, -0.5 * c * (cs.a_u + cs.a_v));
    Ok(num.div(den).value())
}

/// Conditional planar 2x2 G; dispatches to the s = 1/2 simplification when
/// both exponents are exactly 1/2.
pub fn planar_g_cond(inputs: &PlanarBoundInputs) -> Result<GMatrix> {
    if inputs.s_u == 0.5 && inputs.s_v == 0.5 {
        planar_g_cond_path(inputs, true)
    } else {
        planar_g_cond_path(inputs, false)
    }
}

/// General-exponent path, usable at any valid (s_u, s_v) including 1/2.
pub fn planar_g_cond_general(inputs: &PlanarBoundInputs) -> Result<GMatrix> {
    planar_g_cond_path(inputs, false)
}

fn planar_g_cond_path(inputs: &PlanarBoundInputs, half: bool) -> Result<GMatrix> {
    inputs.validate()?;
    if !inputs.model.is_conditional() {
        return Err(WwbError::Model(
            "planar_g_cond needs the conditional model".into(),
        ));
    }
    let c = inputs.model.c_snr()?;
    let t = inputs.model.snapshots() as f64;
    let cs = cos_sums(inputs.geometry, inputs.h_u, inputs.h_v);

    let (guu, gvv, guv) = if half {
        (
            cond_diag_half(inputs.h_u, cs.a_u, cs.a_u2, c)?,
            cond_diag_half(inputs.h_v, cs.a_v, cs.a_v2, c)?,
            cond_cross_half(&cs, c)?,
        )
    } else {
        (
            cond_diag_general(inputs.h_u, inputs.s_u, cs.a_u, cs.a_u2, c, t)?,
            cond_diag_general(inputs.h_v, inputs.s_v, cs.a_v, cs.a_v2, c, t)?,
            cond_cross_general(&cs, inputs.s_u, inputs.s_v, c)?,
        )
    };
    let g = GMatrix {
        entries: vec![vec![guu, guv], vec![guv, gvv]],
        h: vec![inputs.h_u, inputs.h_v],
        s: vec![inputs.s_u, inputs.s_v],
    };
    g.validate()?;
    Ok(g)
}

// ---------------------------------------------------------------------------
// Linear arrays: scalar bounds
// ---------------------------------------------------------------------------

fn check_linear(geometry: &ArrayGeometry, h: f64, s: f64) -> Result<()> {
    if !geometry.is_linear() {
        return Err(WwbError::Geometry(
            "linear bound needs a linear array (dy = 0)".into(),
        ));
    }
    if h == 0.0 || !(h.abs() < 2.0) {
        return Err(WwbError::Degenerate(format!(
            "test point must satisfy 0 < |h| < 2, got {h}"
        )));
    }
    if !(0.0 < s && s < 1.0) {
        return Err(WwbError::Degenerate(format!(
            "exponent must lie in (0,1), got {s}"
        )));
    }
    Ok(())
}

/// The scalar G element of a linear array under the unconditional model
/// (the bound for a given (h, s) is `h^2 / G`).
pub fn linear_g_uncond(h: f64, s: f64, geometry: &ArrayGeometry, model: &SignalModel) -> Result<f64> {
    check_linear(geometry, h, s)?;
    let m2 = (geometry.len() as f64).powi(2);
    let u_snr = model.u_snr(geometry.len())?;
    let t = model.snapshots() as f64;
    let d1 = m2 - steering_sum(geometry, h, 0.0).norm_sqr();
    let d2 = m2 - steering_sum(geometry, 2.0 * h, 0.0).norm_sqr();
    uncond_diag_general(h, s, d1, d2, u_snr, t)
}

/// Unconditional linear-array bound at a given test point and exponent;
/// the supremum over h (and s) is the optimizer's job.
pub fn linear_uwwb(h: f64, s: f64, geometry: &ArrayGeometry, model: &SignalModel) -> Result<f64> {
    Ok(h * h / linear_g_uncond(h, s, geometry, model)?)
}

/// The scalar G element of a linear array under the conditional model.
pub fn linear_g_cond(h: f64, s: f64, geometry: &ArrayGeometry, model: &SignalModel) -> Result<f64> {
    check_linear(geometry, h, s)?;
    let m = geometry.len() as f64;
    let c = model.c_snr()?;
    let a1 = m - steering_sum(geometry, h, 0.0).re;
    let a2 = m - steering_sum(geometry, 2.0 * h, 0.0).re;
    cond_diag_general(h, s, a1, a2, c, model.snapshots() as f64)
}

/// Conditional linear-array bound at a given test point and exponent.
pub fn linear_cwwb(h: f64, s: f64, geometry: &ArrayGeometry, model: &SignalModel) -> Result<f64> {
    Ok(h * h / linear_g_cond(h, s, geometry, model)?)
}
