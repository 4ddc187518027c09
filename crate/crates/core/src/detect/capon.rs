use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ramap::{AngleGrid, RangeCube};
use crate::error::{Error, Result};
use crate::sim::ArrayGeometry;

const LOADING: f64 = 1e-3;

/// Inverse of the diagonally loaded covariance R + εI, ε = 1e-3·tr(R)/N.
pub(crate) fn loaded_inverse(r: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = r.nrows();
    let trace: f64 = (0..n).map(|i| r[(i, i)].re).sum();
    let eps = LOADING * trace / n as f64;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Numeric("covariance has no power to load".into()));
    }
    let mut loaded = r.clone();
    for i in 0..n {
        loaded[(i, i)] += Complex64::new(eps, 0.0);
    }
    loaded
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Numeric("loaded covariance is not positive definite".into()))
}

/// Capon power 1/(vᴴR⁻¹v) over `elevation` at fixed azimuth (radians).
pub fn capon_spectrum(
    r_inv: &DMatrix<Complex64>,
    geometry: &ArrayGeometry,
    azimuth: f64,
    elevation: &AngleGrid,
) -> Vec<f64> {
    elevation
        .degrees
        .iter()
        .map(|&el| {
            let v = nalgebra::DVector::from_vec(geometry.steering(azimuth, el.to_radians()));
            let q = (v.adjoint() * r_inv * &v)[(0, 0)].re;
            if q > 0.0 {
                1.0 / q
            } else {
                0.0
            }
        })
        .collect()
}

fn argmax_deg(spec: &[f64], grid: &AngleGrid) -> f64 {
    let k = (0..spec.len())
        .max_by(|&a, &b| spec[a].total_cmp(&spec[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    grid.degrees[k]
}

/// Elevation (degrees) of the strongest Capon response at `bin`, looking
/// along `azimuth_deg`.
pub fn capon_elevation(
    cube: &RangeCube,
    geometry: &ArrayGeometry,
    bin: usize,
    azimuth_deg: f64,
    elevation: &AngleGrid,
) -> Result<f64> {
    if geometry.elevation_rows().len() < 2 {
        return Err(Error::Argument("Capon elevation needs at least two element rows".into()));
    }
    if cube.channels != geometry.len() {
        return Err(Error::Argument("channel count does not match geometry".into()));
    }
    let r_inv = loaded_inverse(&cube.covariance(bin))?;
    let spec = capon_spectrum(&r_inv, geometry, azimuth_deg.to_radians(), elevation);
    Ok(argmax_deg(&spec, elevation))
}

pub(crate) fn capon_elevation_with(
    r_inv: &DMatrix<Complex64>,
    geometry: &ArrayGeometry,
    azimuth_deg: f64,
    elevation: &AngleGrid,
) -> f64 {
    argmax_deg(
        &capon_spectrum(r_inv, geometry, azimuth_deg.to_radians(), elevation),
        elevation,
    )
}
