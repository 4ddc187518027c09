use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dsp::RangeFft;
use crate::error::{Error, Result};
use crate::sim::{ArrayGeometry, FrameRef};

/// Uniform angle grid in degrees, symmetric about 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    pub degrees: Vec<f64>,
}

impl AngleGrid {
    pub fn symmetric(limit_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && limit_deg >= 0.0) {
            return Err(Error::Argument(format!(
                "angle grid needs step > 0 and limit >= 0, got {step_deg}/{limit_deg}"
            )));
        }
        let half = (limit_deg / step_deg + 1e-9).floor() as i64;
        Ok(Self {
            degrees: (-half..=half).map(|k| k as f64 * step_deg).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self::symmetric(60.0, 1.0).expect("valid default grid")
    }
}

/// Range profiles of every chirp and channel of one frame.
#[derive(Debug, Clone)]
pub struct RangeCube {
    /// `[chirp][channel][bin]`
    pub data: Vec<Complex64>,
    pub chirps: usize,
    pub channels: usize,
    pub bins: usize,
}

impl RangeCube {
    pub fn from_frame(frame: FrameRef<'_>, plan: &RangeFft) -> Self {
        let mut data = Vec::with_capacity(frame.data.len());
        for c in 0..frame.chirps {
            for ch in 0..frame.channels {
                data.extend(plan.process(frame.chirp(c, ch)));
            }
        }
        Self {
            data,
            chirps: frame.chirps,
            channels: frame.channels,
            bins: frame.samples,
        }
    }

    #[inline]
    pub fn at(&self, chirp: usize, channel: usize, bin: usize) -> Complex64 {
        self.data[(chirp * self.channels + channel) * self.bins + bin]
    }

    /// Channel snapshot of one chirp at one range bin.
    pub fn snapshot(&self, chirp: usize, bin: usize) -> Vec<Complex64> {
        (0..self.channels).map(|ch| self.at(chirp, ch, bin)).collect()
    }

    /// Total power per range bin, summed over chirps and channels.
    pub fn bin_power(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.bins];
        for row in self.data.chunks_exact(self.bins) {
            for (acc, z) in p.iter_mut().zip(row) {
                *acc += z.norm_sqr();
            }
        }
        p
    }

    /// Spatial covariance R = mean over chirps of x xᴴ at one range bin.
    pub fn covariance(&self, bin: usize) -> DMatrix<Complex64> {
        let n = self.channels;
        let mut r = DMatrix::<Complex64>::zeros(n, n);
        for c in 0..self.chirps {
            let x = self.snapshot(c, bin);
            for i in 0..n {
                for j in i..n {
                    r[(i, j)] += x[i] * x[j].conj();
                }
            }
        }
        let inv = 1.0 / self.chirps.max(1) as f64;
        for i in 0..n {
            for j in i..n {
                let v = r[(i, j)] * inv;
                r[(i, j)] = v;
                r[(j, i)] = v.conj();
            }
        }
        r
    }
}

/// Conventional-beamformer power over range bins × azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthMap {
    /// Row-major, `power[bin * azimuth.len() + a]`.
    pub power: Vec<f64>,
    pub n_range: usize,
    pub azimuth: AngleGrid,
}

impl RangeAzimuthMap {
    pub fn new(power: Vec<f64>, n_range: usize, azimuth: AngleGrid) -> Result<Self> {
        if power.len() != n_range * azimuth.len() {
            return Err(Error::Argument(format!(
                "{} power cells do not form a {n_range}×{} map",
                power.len(),
                azimuth.len()
            )));
        }
        Ok(Self {
            power,
            n_range,
            azimuth,
        })
    }

    pub fn n_azimuth(&self) -> usize {
        self.azimuth.len()
    }

    #[inline]
    pub fn get(&self, bin: usize, az: usize) -> f64 {
        self.power[bin * self.n_azimuth() + az]
    }

    pub fn argmax(&self) -> (usize, usize) {
        let k = (0..self.power.len())
            .max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        (k / self.n_azimuth(), k % self.n_azimuth())
    }
}

/// P(φ) = vᴴ R v over the base-row elements (the horizontal aperture),
/// which equals |vᴴx|² averaged over chirps.
pub fn range_azimuth_map(
    cube: &RangeCube,
    geometry: &ArrayGeometry,
    azimuth: &AngleGrid,
) -> Result<RangeAzimuthMap> {
    if cube.channels != geometry.len() {
        return Err(Error::Argument(format!(
            "frame has {} channels, geometry {} elements",
            cube.channels,
            geometry.len()
        )));
    }
    let row = geometry.base_row();
    let steer: Vec<Vec<Complex64>> = azimuth
        .degrees
        .iter()
        .map(|&a| {
            let v = geometry.steering(a.to_radians(), 0.0);
            row.iter().map(|&i| v[i]).collect()
        })
        .collect();
    let m = row.len();
    let mut power = Vec::with_capacity(cube.bins * azimuth.len());
    let mut r = vec![Complex64::new(0.0, 0.0); m * m];
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for bin in 0..cube.bins {
        r.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for c in 0..cube.chirps {
            for (xi, &i) in x.iter_mut().zip(&row) {
                *xi = cube.at(c, i, bin);
            }
            for i in 0..m {
                for j in 0..m {
                    r[i * m + j] += x[i] * x[j].conj();
                }
            }
        }
        let inv = 1.0 / (cube.chirps.max(1) * m * m) as f64;
        for v in &steer {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    s += r[i * m + j] * v[j];
                }
                acc += v[i].conj() * s;
            }
            power.push((acc.re * inv).max(0.0));
        }
    }
    RangeAzimuthMap::new(power, cube.bins, azimuth.clone())
}
