//! Scenario files: the CLI's unit of work.
//!
//! A scenario is a flat JSON document bundling the array geometry, the
//! signal model, per-parameter priors, an SNR sweep, optimizer grids, trial
//! counts and the RNG seed. Angles appear in degrees in files (source
//! pointing and the V-shape opening angle) and are converted to
//! direction-cosine parameters internally; priors act directly on the
//! direction cosines, which is also where the uniform supports live.
//!
//! ```json
//! {
//!   "name": "uca16-unconditional",
//!   "geometry": { "kind": "uca", "sensors": 16, "spacing": 0.5 },
//!   "model": { "kind": "unconditional", "snapshots": 100, "sigma_n2": 1.0 },
//!   "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 },
//!              { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
//!   "theta_true": { "elevation_deg": 30.0, "azimuth_deg": 60.0 },
//!   "snr_sweep_db": [-20.0, -10.0, 0.0, 10.0],
//!   "trials": 2000,
//!   "seed": 20240901,
//!   "optimizer": { "s_grid": [0.5], "refine": true },
//!   "map_grid": 2048
//! }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WwbError};
use crate::geometry::ArrayGeometry;
use crate::optimizer::OptimizerConfig;
use crate::prior::{Prior, PriorSpec};
use crate::signal::SignalModel;

/// Geometry description as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometrySpec {
    Ula {
        sensors: usize,
        spacing: f64,
    },
    Uca {
        sensors: usize,
        spacing: f64,
    },
    Vshape {
        per_branch: usize,
        delta_deg: f64,
        spacing: f64,
    },
    Custom {
        positions: Vec<(f64, f64)>,
    },
}

impl GeometrySpec {
    pub fn build(&self) -> Result<ArrayGeometry> {
        match self {
            GeometrySpec::Ula { sensors, spacing } => ArrayGeometry::ula(*sensors, *spacing),
            GeometrySpec::Uca { sensors, spacing } => ArrayGeometry::uca(*sensors, *spacing),
            GeometrySpec::Vshape {
                per_branch,
                delta_deg,
                spacing,
            } => ArrayGeometry::v_shaped(*per_branch, delta_deg.to_radians(), *spacing),
            GeometrySpec::Custom { positions } => {
                ArrayGeometry::new(positions.clone(), "custom")
            }
        }
    }
}

/// Signal model description as written in scenario files. Signal power is
/// set per SNR sweep point, so only the noise floor and snapshot count are
/// fixed here; a conditional waveform defaults to constant unit-amplitude
/// samples (the closed forms depend only on the accumulated energy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Unconditional {
        snapshots: usize,
        #[serde(default = "one")]
        sigma_n2: f64,
    },
    Conditional {
        snapshots: usize,
        #[serde(default = "one")]
        sigma_n2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        waveform: Option<Vec<(f64, f64)>>,
    },
}

fn one() -> f64 {
    1.0
}

/// Source direction in degrees; converted to direction cosines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSpec {
    pub elevation_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometrySpec,
    pub model: ModelSpec,
    pub prior: Vec<Prior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_true: Option<ThetaSpec>,
    pub snr_sweep_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// MAP search grid points per parameter.
    #[serde(default = "default_map_grid")]
    pub map_grid: usize,
}

fn default_trials() -> usize {
    2000
}

fn default_map_grid() -> usize {
    2048
}

impl Scenario {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        self.geometry.build()
    }

    pub fn prior_spec(&self) -> Result<PriorSpec> {
        PriorSpec::new(self.prior.clone())
    }

    /// Number of direction parameters (1 linear, 2 planar).
    pub fn q(&self) -> Result<usize> {
        Ok(self.prior.len())
    }

    /// Signal model at one sweep point: the signal power is scaled so that
    /// the SNR — `sigma_s^2/sigma_n^2` (unconditional) or
    /// `sum_t |s(t)|^2 / (T sigma_n^2)` (conditional) — hits `snr_db`.
    pub fn model_at(&self, snr_db: f64) -> Result<SignalModel> {
        let lin = 10f64.powf(snr_db / 10.0);
        match &self.model {
            ModelSpec::Unconditional { snapshots, sigma_n2 } => {
                SignalModel::unconditional(lin * sigma_n2, *sigma_n2, *snapshots)
            }
            ModelSpec::Conditional {
                snapshots,
                sigma_n2,
                waveform,
            } => match waveform {
                None => SignalModel::conditional_constant(lin * sigma_n2, *sigma_n2, *snapshots),
                Some(w) => {
                    let base: Vec<Complex64> =
                        w.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                    let energy: f64 = base.iter().map(|s| s.norm_sqr()).sum();
                    if energy <= 0.0 {
                        return Err(WwbError::Model("waveform has zero energy".into()));
                    }
                    let scale = (lin * sigma_n2 * *snapshots as f64 / energy).sqrt();
                    SignalModel::conditional(base.iter().map(|s| s * scale).collect(), *sigma_n2)
                }
            },
        }
    }

    /// Resolved true direction parameters; defaults to the prior midpoint.
    pub fn theta_true_resolved(&self) -> Result<Vec<f64>> {
        let q = self.prior.len();
        let theta = match &self.theta_true {
            None => self.prior_spec()?.midpoint(),
            Some(spec) => {
                let el = spec.elevation_deg.to_radians();
                match (q, spec.azimuth_deg) {
                    (1, None) => vec![el.sin()],
                    (2, Some(az)) => {
                        let az = az.to_radians();
                        vec![el.sin() * az.cos(), el.sin() * az.sin()]
                    }
                    _ => {
                        return Err(WwbError::Scenario {
                            path: self.name.clone(),
                            field: "theta_true".into(),
                            message: format!(
                                "needs {} angle(s) for a {q}-parameter scenario",
                                if q == 1 { "elevation only" } else { "elevation and azimuth" }
                            ),
                        })
                    }
                }
            }
        };
        Ok(theta)
    }

    /// Validate every invariant, reporting the offending field.
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| {
            Err(WwbError::Scenario {
                path: self.name.clone(),
                field: field.into(),
                message,
            })
        };
        let geometry = match self.geometry.build() {
            Ok(g) => g,
            Err(e) => return fail("geometry", e.to_string()),
        };
        if let Err(e) = PriorSpec::new(self.prior.clone()) {
            return fail("prior", e.to_string());
        }
        let q = self.prior.len();
        let p = geometry.params_per_source();
        if q != p {
            return fail(
                "prior",
                format!(
                    "{q} prior entries but the {} geometry takes {p}",
                    if p == 1 { "linear" } else { "planar" }
                ),
            );
        }
        if self.snr_sweep_db.is_empty() {
            return fail("snr_sweep_db", "sweep is empty".into());
        }
        if self.snr_sweep_db.iter().any(|x| !x.is_finite()) {
            return fail("snr_sweep_db", "non-finite sweep point".into());
        }
        if let Err(e) = self.model_at(self.snr_sweep_db[0]) {
            return fail("model", e.to_string());
        }
        let theta = match self.theta_true_resolved() {
            Ok(t) => t,
            Err(e) => return fail("theta_true", e.to_string()),
        };
        if !self.prior_spec()?.contains(&theta) {
            return fail(
                "theta_true",
                format!("resolved direction {theta:?} lies outside the prior support"),
            );
        }
        if let Err(e) = self.optimizer.validate() {
            return fail("optimizer", e.to_string());
        }
        if self.map_grid < 8 {
            return fail("map_grid", "needs at least 8 grid points".into());
        }
        Ok(())
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Read, parse and validate a scenario file; errors carry the path.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| WwbError::Scenario {
        path: path.display().to_string(),
        field: "file".into(),
        message: e.to_string(),
    })?;
    parse_scenario(&text).map_err(|e| match e {
        WwbError::Json(j) => WwbError::Scenario {
            path: path.display().to_string(),
            field: "json".into(),
            message: j.to_string(),
        },
        WwbError::Scenario { field, message, .. } => WwbError::Scenario {
            path: path.display().to_string(),
            field,
            message,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "name": "pair",
            "geometry": { "kind": "custom", "positions": [[0.0, 0.0], [0.5, 0.0]] },
            "model": { "kind": "unconditional", "snapshots": 10 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [0.0]
        }"#
    }

    #[test]
    fn minimal_linear_scenario_parses() {
        let s = parse_scenario(minimal()).unwrap();
        assert_eq!(s.geometry().unwrap().len(), 2);
        assert_eq!(s.q().unwrap(), 1);
        assert_eq!(s.trials, 2000);
        assert_eq!(s.map_grid, 2048);
    }

    #[test]
    fn inverted_prior_bounds_name_the_field() {
        let text = minimal().replace(r#""a": -1.0, "b": 1.0"#, r#""a": 1.0, "b": -1.0"#);
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("prior"), "got: {msg}");
    }

    #[test]
    fn prior_count_must_match_geometry_kind() {
        let text = minimal().replace(
            r#""prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 } ]"#,
            r#""prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 },
                          { "kind": "uniform", "a": -1.0, "b": 1.0 } ]"#,
        );
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn theta_true_conversion() {
        let mut s = parse_scenario(minimal()).unwrap();
        s.theta_true = Some(ThetaSpec {
            elevation_deg: 30.0,
            azimuth_deg: None,
        });
        let t = s.theta_true_resolved().unwrap();
        assert!((t[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn snr_scaling() {
        let s = parse_scenario(minimal()).unwrap();
        let m = s.model_at(10.0).unwrap();
        let SignalModel::Unconditional { sigma_s2, .. } = m else { panic!() };
        assert!((sigma_s2 - 10.0).abs() < 1e-12);
    }

    proptest::proptest! {
        // bit-identical serialize -> parse round trip for arbitrary finite
        // field values (serde_json prints f64 in shortest-round-trip form)
        #[test]
        fn round_trips_for_arbitrary_field_values(
            spacing in 0.01f64..5.0,
            sigma_n2 in 0.01f64..100.0,
            a in -5.0f64..-0.01,
            b in 0.01f64..5.0,
            elev in -89.0f64..89.0,
            snr1 in -200.0f64..200.0,
            seed in proptest::num::u64::ANY,
        ) {
            let s = Scenario {
                name: "prop".into(),
                geometry: GeometrySpec::Ula { sensors: 4, spacing },
                model: ModelSpec::Unconditional { snapshots: 7, sigma_n2 },
                prior: vec![Prior::Uniform { a, b }],
                theta_true: Some(ThetaSpec { elevation_deg: elev, azimuth_deg: None }),
                snr_sweep_db: vec![snr1],
                trials: 11,
                seed,
                optimizer: Default::default(),
                map_grid: 64,
            };
            // theta_true must fall inside the prior; skip draws that do not
            proptest::prop_assume!(elev.to_radians().sin() >= a && elev.to_radians().sin() <= b);
            let json = s.to_json().unwrap();
            let back = parse_scenario(&json).unwrap();
            proptest::prop_assert_eq!(&s, &back);
            proptest::prop_assert_eq!(json, back.to_json().unwrap());
        }
    }

    #[test]
    fn round_trips_bit_identically() {
        let mut s = parse_scenario(minimal()).unwrap();
        s.theta_true = Some(ThetaSpec {
            elevation_deg: 12.3456789012345,
            azimuth_deg: None,
        });
        s.snr_sweep_db = vec![-17.000000000000004, 3.3333333333333335];
        let json = s.to_json().unwrap();
        let back = parse_scenario(&json).unwrap();
        assert_eq!(s, back);
        // and a second round trip produces identical bytes
        assert_eq!(json, back.to_json().unwrap());
    }
}
