use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::ArrayGeometry;

/// Unit-modulus weights pointing the array at (azimuth, elevation).
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub weights: Vec<Complex64>,
    /// degrees
    pub azimuth: f64,
    /// degrees
    pub elevation: f64,
}

pub fn steering_vector(geometry: &ArrayGeometry, azimuth_deg: f64, elevation_deg: f64) -> SteeringVector {
    SteeringVector {
        weights: geometry.steering(azimuth_deg.to_radians(), elevation_deg.to_radians()),
        azimuth: azimuth_deg,
        elevation: elevation_deg,
    }
}

/// d_s[i] = Σₖ y[i,k]·conj(wₖ) for every chirp row of `y` (row-major,
/// `chirps × channels`).
pub fn beamform_chirps(y: &[Complex64], v: &SteeringVector) -> Result<Vec<Complex64>> {
    let n = v.weights.len();
    if n == 0 || y.len() % n != 0 {
        return Err(Error::Argument(format!(
            "{} samples do not form rows of {n} channels",
            y.len()
        )));
    }
    let conj: Vec<Complex64> = v.weights.iter().map(|w| w.conj()).collect();
    Ok(y.chunks_exact(n)
        .map(|row| row.iter().zip(&conj).map(|(a, b)| a * b).sum())
        .collect())
}
