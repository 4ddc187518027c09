use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Circle through an I/Q arc; the center is the static (DC) reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center_i: f64,
    pub center_q: f64,
    pub radius: f64,
    /// RMS geometric distance of the samples to the circle.
    pub residual: f64,
}

impl CircleFit {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center_i, self.center_q)
    }
}

const MAX_ITERATIONS: usize = 50;
const STEP_TOL: f64 = 1e-10;

fn rms_residual(pts: &[[f64; 2]], c: [f64; 2], r: f64) -> f64 {
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let d = (p[0] - c[0]).hypot(p[1] - c[1]) - r;
            d * d
        })
        .sum();
    (ss / pts.len() as f64).sqrt()
}

/// Algebraic circle fit (Kåsa) refined by Gauss–Newton on the geometric
/// distance.
pub fn fit_circle_dc(iq: &[Complex64]) -> Result<CircleFit> {
    if iq.len() < 3 {
        return Err(Error::Fit {
            reason: format!("circle fit needs 3 points, got {}", iq.len()),
            residual: f64::NAN,
        });
    }
    // work in centered, scaled coordinates for conditioning
    let n = iq.len() as f64;
    let mean = iq.iter().sum::<Complex64>() / n;
    let scale = (iq.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Fit {
            reason: "I/Q samples are coincident or non-finite".into(),
            residual: f64::NAN,
        });
    }
    let pts: Vec<[f64; 2]> = iq
        .iter()
        .map(|z| {
            let w = (z - mean) / scale;
            [w.re, w.im]
        })
        .collect();

    // x² + y² + D x + E y + F = 0
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for p in &pts {
        let row = Vector3::new(p[0], p[1], 1.0);
        ata += row * row.transpose();
        atb -= row * (p[0] * p[0] + p[1] * p[1]);
    }
    let svd = ata.svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if smin <= 1e-12 * smax {
        return Err(Error::Fit {
            reason: "I/Q samples are collinear".into(),
            residual: f64::NAN,
        });
    }
    let sol = svd.solve(&atb, 0.0).map_err(|e| Error::Numeric(e.to_string()))?;
    let mut c = [-sol[0] / 2.0, -sol[1] / 2.0];
    let r2 = c[0] * c[0] + c[1] * c[1] - sol[2];
    if !(r2 > 0.0) {
        return Err(Error::Fit {
            reason: "algebraic fit produced an imaginary radius".into(),
            residual: f64::NAN,
        });
    }
    let mut r = r2.sqrt();

    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for p in &pts {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            let d = dx.hypot(dy);
            if d == 0.0 {
                continue;
            }
            let j = Vector3::new(-dx / d, -dy / d, -1.0);
            jtj += j * j.transpose();
            jtr += j * (d - r);
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else {
            break;
        };
        c[0] += step[0];
        c[1] += step[1];
        r += step[2];
        if step.norm() < STEP_TOL {
            break;
        }
    }
    let residual = rms_residual(&pts, c, r) * scale;
    if !(r > 0.0) || !r.is_finite() || r > 1e6 {
        return Err(Error::Fit {
            reason: "circle fit diverged (samples nearly collinear)".into(),
            residual,
        });
    }
    Ok(CircleFit {
        center_i: c[0] * scale + mean.re,
        center_q: c[1] * scale + mean.im,
        radius: r * scale,
        residual,
    })
}
