use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::RadarConfig;
use crate::error::{Error, Result};

/// TDM-MIMO virtual array: one element per (tx, rx) pair, positions in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub virtual_positions: Vec<[f64; 3]>,
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        self.virtual_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.virtual_positions.is_empty()
    }

    /// Distinct horizontal element positions, in half-wavelength units.
    pub fn azimuth_columns(&self) -> Vec<i64> {
        self.distinct_axis(0)
    }

    /// Distinct vertical element positions, in half-wavelength units.
    pub fn elevation_rows(&self) -> Vec<i64> {
        self.distinct_axis(2)
    }

    /// Far-field steering vector exp(j·2π/λ·p·u) toward unit vector `u`.
    pub fn steering_toward(&self, u: [f64; 3]) -> Vec<Complex64> {
        let k = 2.0 * PI / self.wavelength;
        self.virtual_positions
            .iter()
            .map(|p| Complex64::from_polar(1.0, k * (p[0] * u[0] + p[1] * u[1] + p[2] * u[2])))
            .collect()
    }

    /// Steering vector for (azimuth, elevation) in radians.
    pub fn steering(&self, azimuth: f64, elevation: f64) -> Vec<Complex64> {
        self.steering_toward(direction(azimuth, elevation))
    }

    /// Indices of the elements in the lowest row.
    pub fn base_row(&self) -> Vec<usize> {
        let half = self.wavelength / 2.0;
        let low = self.elevation_rows().first().copied().unwrap_or(0);
        (0..self.len())
            .filter(|&i| (self.virtual_positions[i][2] / half).round() as i64 == low)
            .collect()
    }

    fn distinct_axis(&self, axis: usize) -> Vec<i64> {
        let half = self.wavelength / 2.0;
        let mut v: Vec<i64> = self
            .virtual_positions
            .iter()
            .map(|p| (p[axis] / half).round() as i64)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Unit vector pointing at (azimuth, elevation), radians. x = right,
/// y = boresight, z = up.
pub fn direction(azimuth: f64, elevation: f64) -> [f64; 3] {
    [
        azimuth.sin() * elevation.cos(),
        azimuth.cos() * elevation.cos(),
        elevation.sin(),
    ]
}

/// Sums every TX/RX position pair into the virtual array.
pub fn build_virtual_array(config: &RadarConfig) -> Result<ArrayGeometry> {
    if config.n_tx == 0 || config.n_rx == 0 {
        return Err(Error::Config("array needs at least one tx and one rx".into()));
    }
    if config.tx_positions.len() != config.n_tx || config.rx_positions.len() != config.n_rx {
        return Err(Error::Config("antenna position count does not match n_tx/n_rx".into()));
    }
    let wavelength = config.wavelength();
    let half = wavelength / 2.0;
    let mut virtual_positions = Vec::with_capacity(config.n_virtual());
    let mut seen: Vec<[i64; 3]> = Vec::with_capacity(config.n_virtual());
    for tx in &config.tx_positions {
        for rx in &config.rx_positions {
            let units = [tx[0] + rx[0], tx[1] + rx[1], tx[2] + rx[2]];
            // quantized to 1e-6 half-wavelengths for the duplicate check
            let key = units.map(|u| (u * 1e6).round() as i64);
            if seen.contains(&key) {
                return Err(Error::Config(format!(
                    "duplicate virtual element at {units:?} half-wavelengths"
                )));
            }
            seen.push(key);
            virtual_positions.push(units.map(|u| u * half));
        }
    }
    Ok(ArrayGeometry {
        virtual_positions,
        wavelength,
    })
}
