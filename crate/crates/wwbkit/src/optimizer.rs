//! Maximization of the bound over test points and exponents.
//!
//! The bound for a fixed (h, s) is `H G^-1 H^T` with `H = Diag(h)`; a tight
//! bound requires taking the supremum of its trace over the candidate grid.
//! Grid evaluation is embarrassingly parallel and the argmax reduction is
//! deterministic regardless of evaluation order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WwbError};
use crate::gmatrix::GMatrix;

/// Condition-number cap above which a G matrix is skipped rather than
/// inverted; such points arise as h -> 0 where the bound degenerates.
pub const CONDITION_CAP: f64 = 1e12;

/// Candidate test points for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HGrid {
    /// Explicit candidates (zero excluded).
    List(Vec<f64>),
    /// Log-spaced magnitudes between `min` and `max`, both signs.
    LogSpaced { min: f64, max: f64, count: usize },
}

impl Default for HGrid {
    fn default() -> Self {
        // Threshold-region optima move over orders of magnitude with SNR;
        // cover [1e-3, support - 1e-3] for the [-1, 1] priors.
        HGrid::LogSpaced {
            min: 1e-3,
            max: 2.0 - 1e-3,
            count: 200,
        }
    }
}

impl HGrid {
    /// Materialize the candidate list in deterministic order.
    pub fn candidates(&self) -> Result<Vec<f64>> {
        let list = match self {
            HGrid::List(v) => v.clone(),
            HGrid::LogSpaced { min, max, count } => {
                if !(*min > 0.0) || !(max > min) || *count < 2 {
                    return Err(WwbError::Model(format!(
                        "log-spaced h grid needs 0 < min < max and count >= 2, \
                         got [{min}, {max}] x {count}"
                    )));
                }
                let ratio = (max / min).ln() / (*count as f64 - 1.0);
                let mags: Vec<f64> =
                    (0..*count).map(|k| min * (ratio * k as f64).exp()).collect();
                let mut v: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
                v.extend(mags);
                v
            }
        };
        if list.is_empty() {
            return Err(WwbError::Model("empty h grid".into()));
        }
        if list.iter().any(|&h| h == 0.0) {
            return Err(WwbError::Model("h grid must exclude 0".into()));
        }
        Ok(list)
    }
}

/// Search strategy over the joint (h, s) grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Full cartesian product over all parameters.
    #[default]
    ExhaustiveJoint,
    /// Coordinate-wise sweeps: each parameter optimized with the others held
    /// at their running best, two alternating passes, seeded from the best
    /// diagonal point.
    PerParameterProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(default)]
    pub h_grid: HGrid,
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub strategy: Strategy,
    /// One level of grid refinement around the winner (halved log spacing,
    /// same count).
    #[serde(default)]
    pub refine: bool,
}

fn default_s_grid() -> Vec<f64> {
    vec![0.5]
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            h_grid: HGrid::default(),
            s_grid: default_s_grid(),
            strategy: Strategy::default(),
            refine: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.h_grid.candidates()?;
        if self.s_grid.is_empty() {
            return Err(WwbError::Model("empty s grid".into()));
        }
        if self.s_grid.iter().any(|&s| !(0.0 < s && s < 1.0)) {
            return Err(WwbError::Model("s grid entries must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Optimized bound: the matrix, the winning grid point, and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WwbResult {
    pub bound: Vec<Vec<f64>>,
    pub best_h: Vec<f64>,
    pub best_s: Vec<f64>,
    pub objective: f64,
    /// G at the optimum.
    pub g: GMatrix,
    /// Grid points whose evaluation failed or was skipped as near-singular.
    pub skipped: usize,
    /// Total grid points visited.
    pub evaluated: usize,
}

/// `H G^-1 H^T` with `H = Diag(h)`.
///
/// q = 2 uses the explicit 2x2 inverse (scaled by the largest entry so huge
/// well-conditioned G matrices do not overflow the determinant); other sizes
/// go through a dense solve. Near-singular matrices are reported, not
/// clamped.
pub fn wwb_from_g(h: &[f64], g: &GMatrix) -> Result<Vec<Vec<f64>>> {
    let q = g.q();
    if h.len() != q {
        return Err(WwbError::Dimension("h length mismatch with G".into()));
    }
    match q {
        1 => {
            let g00 = g.entries[0][0];
            if !(g00 > 0.0) || !g00.is_finite() {
                return Err(WwbError::SingularG { cond: f64::INFINITY });
            }
            Ok(vec![vec![h[0] * h[0] / g00]])
        }
        2 => {
            let (a, b, c) = (g.entries[0][0], g.entries[1][1], g.entries[0][1]);
            let scale = a.abs().max(b.abs()).max(c.abs());
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(WwbError::SingularG { cond: f64::INFINITY });
            }
            let (an, bn, cn) = (a / scale, b / scale, c / scale);
            // eigenvalues of the scaled symmetric 2x2
            let mid = (an + bn) / 2.0;
            let rad = ((an - bn) / 2.0).hypot(cn);
            let (l1, l2) = (mid + rad, mid - rad);
            let cond = if l2.abs() > 0.0 {
                (l1.abs() / l2.abs()).max(l2.abs() / l1.abs())
            } else {
                f64::INFINITY
            };
            if cond > CONDITION_CAP {
                return Err(WwbError::SingularG { cond });
            }
            let det = an * bn - cn * cn;
            if det <= 0.0 {
                return Err(WwbError::SingularG { cond: f64::INFINITY });
            }
            let f = 1.0 / (det * scale);
            Ok(vec![
                vec![h[0] * h[0] * bn * f, -h[0] * h[1] * cn * f],
                vec![-h[0] * h[1] * cn * f, h[1] * h[1] * an * f],
            ])
        }
        _ => wwb_from_g_generic(h, g),
    }
}

/// Dense-solve route for arbitrary q (also the oracle for the q = 2 explicit
/// inverse).
pub fn wwb_from_g_generic(h: &[f64], g: &GMatrix) -> Result<Vec<Vec<f64>>> {
    let q = g.q();
    let m = nalgebra::DMatrix::from_fn(q, q, |i, j| g.entries[i][j]);
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > CONDITION_CAP {
        return Err(WwbError::SingularG { cond });
    }
    let inv = m
        .try_inverse()
        .ok_or(WwbError::SingularG { cond: f64::INFINITY })?;
    let mut out = vec![vec![0.0; q]; q];
    for i in 0..q {
        for j in 0..q {
            out[i][j] = h[i] * inv[(i, j)] * h[j];
        }
    }
    Ok(out)
}

fn trace(m: &[Vec<f64>]) -> f64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

struct Candidate {
    h: Vec<f64>,
    s: Vec<f64>,
    bound: Vec<Vec<f64>>,
    g: GMatrix,
    objective: f64,
}

/// Evaluate a batch of (h, s) points in parallel; returns the best candidate
/// (first in batch order among ties) plus evaluation counts.
fn eval_batch<F>(
    evaluator: &F,
    points: &[(Vec<f64>, Vec<f64>)],
) -> (Option<Candidate>, usize, usize)
where
    F: Fn(&[f64], &[f64]) -> Result<GMatrix> + Sync,
{
    let results: Vec<Option<Candidate>> = points
        .par_iter()
        .map(|(h, s)| {
            let g = evaluator(h, s).ok()?;
            if g.validate().is_err() {
                return None;
            }
            let bound = wwb_from_g(h, &g).ok()?;
            let objective = trace(&bound);
            if !objective.is_finite() {
                return None;
            }
            Some(Candidate {
                h: h.clone(),
                s: s.clone(),
                bound,
                g,
                objective,
            })
        })
        .collect();
    let evaluated = results.len();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let mut best: Option<Candidate> = None;
    for c in results.into_iter().flatten() {
        match &best {
            Some(b) if c.objective <= b.objective => {}
            _ => best = Some(c),
        }
    }
    (best, skipped, evaluated)
}

fn cartesian(per_param: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for options in per_param {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &o in options {
                let mut row = prefix.clone();
                row.push(o);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Refined h grid around a winner: same count, halved spacing in log
/// magnitude, winner included exactly, sign preserved.
fn refine_h_grid(winner: f64, base: &HGrid) -> Vec<f64> {
    let count = match base {
        HGrid::LogSpaced { count, .. } => *count,
        HGrid::List(v) => v.len().max(8),
    };
    let ratio = match base {
        HGrid::LogSpaced { min, max, count } => {
            ((max / min).ln() / (*count as f64 - 1.0)).exp()
        }
        HGrid::List(_) => 1.05,
    };
    let half_step = ratio.sqrt();
    let mag = winner.abs();
    let span = count as i64 / 2;
    let mut grid = Vec::with_capacity(count);
    for k in -span..=(count as i64 - 1 - span) {
        let m = mag * half_step.powi(k as i32);
        if m > 0.0 && m < 2.0 {
            grid.push(winner.signum() * m);
        }
    }
    if grid.is_empty() {
        grid.push(winner);
    }
    grid
}

/// Maximize `trace(H G^-1 H^T)` over the configured grid.
///
/// Invalid points (evaluator errors, non-finite or near-singular G) are
/// skipped and counted. The winner is deterministic: first point in grid
/// order among equal objectives. With `refine` set, a second pass runs on a
/// halved-spacing grid centered at the winner; the winner itself is part of
/// the refined grid, so the objective never decreases.
pub fn maximize<F>(evaluator: F, config: &OptimizerConfig, q: usize) -> Result<WwbResult>
where
    F: Fn(&[f64], &[f64]) -> Result<GMatrix> + Sync,
{
    config.validate()?;
    let h_candidates = config.h_grid.candidates()?;
    let s_candidates = config.s_grid.clone();

    let mut skipped = 0usize;
    let mut evaluated = 0usize;
    let mut best: Option<Candidate> = None;

    let consider = |cand: Option<Candidate>, sk: usize, ev: usize,
                        best: &mut Option<Candidate>,
                        skipped: &mut usize,
                        evaluated: &mut usize| {
        *skipped += sk;
        *evaluated += ev;
        if let Some(c) = cand {
            match best {
                Some(b) if c.objective <= b.objective => {}
                _ => *best = Some(c),
            }
        }
    };

    match config.strategy {
        Strategy::ExhaustiveJoint => {
            let h_sets: Vec<Vec<f64>> = vec![h_candidates.clone(); q];
            let s_sets: Vec<Vec<f64>> = vec![s_candidates.clone(); q];
            let points = joint_points(&h_sets, &s_sets);
            let (cand, sk, ev) = eval_batch(&evaluator, &points);
            consider(cand, sk, ev, &mut best, &mut skipped, &mut evaluated);
        }
        Strategy::PerParameterProfile => {
            // Diagonal seeding: all parameters share (h, s).
            let diag: Vec<(Vec<f64>, Vec<f64>)> = h_candidates
                .iter()
                .flat_map(|&h| {
                    s_candidates
                        .iter()
                        .map(move |&s| (vec![h; q], vec![s; q]))
                })
                .collect();
            let (cand, sk, ev) = eval_batch(&evaluator, &diag);
            consider(cand, sk, ev, &mut best, &mut skipped, &mut evaluated);
            for _pass in 0..2 {
                for param in 0..q {
                    let Some(b) = &best else { break };
                    let (bh, bs) = (b.h.clone(), b.s.clone());
                    let points: Vec<(Vec<f64>, Vec<f64>)> = h_candidates
                        .iter()
                        .flat_map(|&h| {
                            let bh = bh.clone();
                            let bs = bs.clone();
                            s_candidates.iter().map(move |&s| {
                                let mut hh = bh.clone();
                                let mut ss = bs.clone();
                                hh[param] = h;
                                ss[param] = s;
                                (hh, ss)
                            })
                        })
                        .collect();
                    let (cand, sk, ev) = eval_batch(&evaluator, &points);
                    consider(cand, sk, ev, &mut best, &mut skipped, &mut evaluated);
                }
            }
        }
    }

    if config.refine {
        if let Some(b) = &best {
            let refined: Vec<Vec<f64>> = b
                .h
                .iter()
                .map(|&w| refine_h_grid(w, &config.h_grid))
                .collect();
            let s_sets: Vec<Vec<f64>> = vec![s_candidates.clone(); q];
            let points = joint_points(&refined, &s_sets);
            let (cand, sk, ev) = eval_batch(&evaluator, &points);
            consider(cand, sk, ev, &mut best, &mut skipped, &mut evaluated);
        }
    }

    let best = best.ok_or(WwbError::EmptySearch(evaluated))?;
    Ok(WwbResult {
        bound: best.bound,
        best_h: best.h,
        best_s: best.s,
        objective: best.objective,
        g: best.g,
        skipped,
        evaluated,
    })
}

fn joint_points(h_sets: &[Vec<f64>], s_sets: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let h_combos = cartesian(h_sets);
    let s_combos = cartesian(s_sets);
    let mut points = Vec::with_capacity(h_combos.len() * s_combos.len());
    for h in &h_combos {
        for s in &s_combos {
            points.push((h.clone(), s.clone()));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(entries: Vec<Vec<f64>>, h: Vec<f64>, s: Vec<f64>) -> GMatrix {
        GMatrix { entries, h, s }
    }

    #[test]
    fn scalar_inverse() {
        let g = g1(vec![vec![4.0]], vec![0.5], vec![0.5]);
        let b = wwb_from_g(&[0.5], &g).unwrap();
        assert!((b[0][0] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn diagonal_g_gives_diagonal_bound() {
        let g = g1(
            vec![vec![2.0, 0.0], vec![0.0, 8.0]],
            vec![0.3, 0.7],
            vec![0.5, 0.5],
        );
        let b = wwb_from_g(&[0.3, 0.7], &g).unwrap();
        assert!((b[0][0] - 0.09 / 2.0).abs() < 1e-15);
        assert!((b[1][1] - 0.49 / 8.0).abs() < 1e-15);
        assert!(b[0][1].abs() < 1e-15);
    }

    #[test]
    fn explicit_inverse_matches_generic_solve() {
        let g = g1(
            vec![vec![3.0, 1.2], vec![1.2, 5.0]],
            vec![0.4, -0.6],
            vec![0.5, 0.5],
        );
        let h = [0.4, -0.6];
        let fast = wwb_from_g(&h, &g).unwrap();
        let slow = wwb_from_g_generic(&h, &g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (fast[i][j] - slow[i][j]).abs() <= 1e-12 * slow[i][j].abs().max(1e-30),
                    "{} vs {}",
                    fast[i][j],
                    slow[i][j]
                );
            }
        }
    }

    #[test]
    fn near_singular_is_reported() {
        let g = g1(
            vec![vec![1.0, 1.0 - 1e-15], vec![1.0 - 1e-15, 1.0]],
            vec![0.1, 0.1],
            vec![0.5, 0.5],
        );
        assert!(matches!(
            wwb_from_g(&[0.1, 0.1], &g),
            Err(WwbError::SingularG { .. })
        ));
    }

    #[test]
    fn huge_well_conditioned_g_does_not_overflow() {
        let g = g1(
            vec![vec![1e200, 1e150], vec![1e150, 2e200]],
            vec![0.1, 0.1],
            vec![0.5, 0.5],
        );
        let b = wwb_from_g(&[0.1, 0.1], &g).unwrap();
        assert!(b[0][0].is_finite() && b[0][0] > 0.0);
    }

    #[test]
    fn maximizes_zero_information_objective() {
        // evaluator G = |h| / (1-|h|/2)^2 gives bound |h|(1-|h|/2)^2 with
        // maximum 8/27 at |h| = 2/3.
        let eval = |h: &[f64], s: &[f64]| -> Result<GMatrix> {
            let a = h[0].abs();
            Ok(GMatrix {
                entries: vec![vec![a / (1.0 - a / 2.0) / (1.0 - a / 2.0)]],
                h: h.to_vec(),
                s: s.to_vec(),
            })
        };
        let config = OptimizerConfig::default();
        let r = maximize(eval, &config, 1).unwrap();
        assert!((r.objective - 8.0 / 27.0).abs() < 1e-3);
        assert!((r.best_h[0].abs() - 2.0 / 3.0).abs() < 0.03);

        // refinement can only improve the objective
        let refined = maximize(
            eval,
            &OptimizerConfig {
                refine: true,
                ..OptimizerConfig::default()
            },
            1,
        )
        .unwrap();
        assert!(refined.objective >= r.objective);
        assert!((refined.objective - 8.0 / 27.0).abs() < 2e-4);
    }

    #[test]
    fn all_invalid_grid_reports_empty_search() {
        let eval = |_: &[f64], _: &[f64]| -> Result<GMatrix> {
            Err(WwbError::InvalidRegion("always".into()))
        };
        assert!(matches!(
            maximize(eval, &OptimizerConfig::default(), 1),
            Err(WwbError::EmptySearch(_))
        ));
    }

    #[test]
    fn deterministic_across_runs() {
        let eval = |h: &[f64], s: &[f64]| -> Result<GMatrix> {
            let a = h[0].abs();
            let b = h[1].abs();
            Ok(GMatrix {
                entries: vec![
                    vec![a / (1.0 - a / 2.0).powi(2), 0.0],
                    vec![0.0, b / (1.0 - b / 2.0).powi(2)],
                ],
                h: h.to_vec(),
                s: s.to_vec(),
            })
        };
        let config = OptimizerConfig {
            strategy: Strategy::PerParameterProfile,
            ..OptimizerConfig::default()
        };
        let a = maximize(eval, &config, 2).unwrap();
        let b = maximize(eval, &config, 2).unwrap();
        assert_eq!(a.best_h, b.best_h);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
