//! Sensor array geometries and steering vectors.
//!
//! Sensor coordinates are stored pre-normalized by the carrier wavelength
//! (the value kept is d/lambda), so the wavelength never appears in any
//! downstream formula: a phase is always `2*pi*(dx*u + dy*v)`.
//!
//! The direction parameters are direction cosines. A planar array estimates
//! `theta = [u, v]` with `u = sin(el)*cos(az)`, `v = sin(el)*sin(az)`; a
//! linear array (all `dy = 0`) estimates the scalar `theta = sin(el)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Result, WwbError};

/// A sensor array in the xOy plane, coordinates in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    sensors: Vec<(f64, f64)>,
    name: String,
}

impl ArrayGeometry {
    /// Build from explicit `(dx, dy)` coordinates in wavelengths.
    pub fn new(sensors: Vec<(f64, f64)>, name: impl Into<String>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(WwbError::Geometry("sensor list is empty".into()));
        }
        if sensors.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(WwbError::Geometry("non-finite sensor coordinate".into()));
        }
        Ok(ArrayGeometry {
            sensors,
            name: name.into(),
        })
    }

    /// Uniform linear array on the Ox axis, positions `(k-1)*spacing`,
    /// `k = 1..=m`.
    pub fn ula(m: usize, spacing: f64) -> Result<Self> {
        let sensors = (0..m).map(|k| (k as f64 * spacing, 0.0)).collect();
        Self::new(sensors, format!("ula{m}"))
    }

    /// Uniform circular array with `spacing` the chord distance between
    /// adjacent sensors, i.e. radius `spacing / (2 sin(pi/m))`.
    pub fn uca(m: usize, spacing: f64) -> Result<Self> {
        if m < 2 {
            return Err(WwbError::Geometry("uca needs at least 2 sensors".into()));
        }
        let radius = spacing / (2.0 * (PI / m as f64).sin());
        let sensors = (0..m)
            .map(|k| {
                let ang = TAU * k as f64 / m as f64;
                (radius * ang.cos(), radius * ang.sin())
            })
            .collect();
        Self::new(sensors, format!("uca{m}"))
    }

    /// V-shaped array: one sensor at the origin plus `per_branch` sensors on
    /// each of two uniform linear branches with inter-sensor `spacing`. The
    /// branches open symmetrically about the Ox axis with angle `delta_rad`
    /// between them.
    pub fn v_shaped(per_branch: usize, delta_rad: f64, spacing: f64) -> Result<Self> {
        if per_branch == 0 {
            return Err(WwbError::Geometry("v-shaped branch is empty".into()));
        }
        let half = delta_rad / 2.0;
        let (c, s) = (half.cos(), half.sin());
        let mut sensors = vec![(0.0, 0.0)];
        for k in 1..=per_branch {
            let r = k as f64 * spacing;
            sensors.push((r * c, r * s));
        }
        for k in 1..=per_branch {
            let r = k as f64 * spacing;
            sensors.push((r * c, -r * s));
        }
        Self::new(sensors, format!("vshape{per_branch}x2"))
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sensors(&self) -> &[(f64, f64)] {
        &self.sensors
    }

    /// A linear array is the special case `dy = 0` for every sensor.
    pub fn is_linear(&self) -> bool {
        self.sensors.iter().all(|&(_, y)| y == 0.0)
    }

    /// Direction parameters per source: 1 on a linear array, 2 otherwise.
    pub fn params_per_source(&self) -> usize {
        if self.is_linear() {
            1
        } else {
            2
        }
    }

    /// Phase of sensor `i` for a single-source parameter block `theta`
    /// (1 entry on a linear array, 2 on a planar one).
    fn phase(&self, i: usize, theta: &[f64]) -> f64 {
        let (dx, dy) = self.sensors[i];
        match theta.len() {
            1 => TAU * dx * theta[0],
            _ => TAU * (dx * theta[0] + dy * theta[1]),
        }
    }

    fn check_block(&self, theta: &[f64]) -> Result<()> {
        let p = self.params_per_source();
        if theta.len() != p {
            return Err(WwbError::Dimension(format!(
                "theta has {} entries but the {} array `{}` takes {}",
                theta.len(),
                if p == 1 { "linear" } else { "planar" },
                self.name,
                p
            )));
        }
        Ok(())
    }
}

/// Steering vector `a(theta)`: element `i` is
/// `exp(j*2*pi*(dx_i*u + dy_i*v))` (or `exp(j*2*pi*dx_i*theta)` on a linear
/// array). Every entry has unit modulus, so `||a||^2 = M` exactly.
pub fn steering_vector(geometry: &ArrayGeometry, theta: &[f64]) -> Result<Vec<Complex64>> {
    geometry.check_block(theta)?;
    Ok((0..geometry.len())
        .map(|i| Complex64::from_polar(1.0, geometry.phase(i, theta)))
        .collect())
}

/// `a(t1)^H a(t2)` evaluated without building the vectors. Depends only on
/// the displacement `t2 - t1` because the phases are linear in theta.
pub fn steering_inner(geometry: &ArrayGeometry, t1: &[f64], t2: &[f64]) -> Result<Complex64> {
    geometry.check_block(t1)?;
    geometry.check_block(t2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..geometry.len() {
        acc += Complex64::from_polar(1.0, geometry.phase(i, t2) - geometry.phase(i, t1));
    }
    Ok(acc)
}

/// Multi-source steering matrix: one column per source block of `theta`.
/// `theta` holds `n` consecutive blocks of `params_per_source` entries.
pub fn steering_matrix(geometry: &ArrayGeometry, theta: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let p = geometry.params_per_source();
    if theta.is_empty() || theta.len() % p != 0 {
        return Err(WwbError::Dimension(format!(
            "theta length {} is not a multiple of {} parameters per source",
            theta.len(),
            p
        )));
    }
    theta
        .chunks(p)
        .map(|block| steering_vector(geometry, block))
        .collect()
}
