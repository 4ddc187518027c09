use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{fit_circle_dc, CircleFit, RangeFft, Window};
use crate::error::{Error, Result};
use crate::sim::DataCube;

/// Strongest range bin over the given frames (power summed over frames,
/// chirps and channels). Near-ties (1e-12 relative) go to the lower bin.
pub fn select_range_bin(cube: &DataCube, frames: Range<usize>, window: Window) -> Result<usize> {
    let [n_frames, chirps, channels, samples] = cube.dims();
    if frames.is_empty() || frames.end > n_frames {
        return Err(Error::Argument(format!(
            "frames {frames:?} outside a {n_frames}-frame cube"
        )));
    }
    let plan = RangeFft::new(samples, window);
    let power = frames
        .into_par_iter()
        .map(|f| {
            let fr = cube.frame(f);
            let mut p = vec![0.0; samples];
            for c in 0..chirps {
                for ch in 0..channels {
                    for (acc, z) in p.iter_mut().zip(plan.process(fr.chirp(c, ch))) {
                        *acc += z.norm_sqr();
                    }
                }
            }
            p
        })
        .reduce(
            || vec![0.0; samples],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let max = power.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        log::warn!("range-bin selection on an all-zero cube; using bin 0");
        return Ok(0);
    }
    Ok(power.iter().position(|&p| p >= max * (1.0 - 1e-12)).unwrap_or(0))
}

/// Selected-bin samples `[frame][chirp][channel]` of a frame range.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSeries {
    pub data: Vec<Complex64>,
    pub frames: usize,
    pub chirps: usize,
    pub channels: usize,
    pub bin: usize,
}

impl BinSeries {
    /// Single-bin windowed DFT of every chirp and channel.
    pub fn extract(cube: &DataCube, frames: Range<usize>, bin: usize, window: Window) -> Result<Self> {
        let [n_frames, chirps, channels, samples] = cube.dims();
        if frames.is_empty() || frames.end > n_frames {
            return Err(Error::Argument(format!(
                "frames {frames:?} outside a {n_frames}-frame cube"
            )));
        }
        if bin >= samples {
            return Err(Error::Argument(format!("bin {bin} outside {samples} range bins")));
        }
        let w = window.coefficients(samples);
        let twiddle: Vec<Complex64> = (0..samples)
            .map(|n| Complex64::from_polar(w[n], -2.0 * PI * (bin * n) as f64 / samples as f64))
            .collect();
        let n_sel = frames.len();
        let per_frame: Vec<Vec<Complex64>> = frames
            .into_par_iter()
            .map(|f| {
                let fr = cube.frame(f);
                let mut out = Vec::with_capacity(chirps * channels);
                for c in 0..chirps {
                    for ch in 0..channels {
                        out.push(
                            fr.chirp(c, ch)
                                .iter()
                                .zip(&twiddle)
                                .map(|(s, t)| Complex64::new(s.re as f64, s.im as f64) * t)
                                .sum(),
                        );
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            data: per_frame.concat(),
            frames: n_sel,
            chirps,
            channels,
            bin,
        })
    }

    /// Samples of one channel in time order.
    pub fn channel(&self, ch: usize) -> Vec<Complex64> {
        self.data.iter().skip(ch).step_by(self.channels).copied().collect()
    }

    fn set_channel(&mut self, ch: usize, values: &[Complex64]) {
        for (dst, v) in self.data.iter_mut().skip(ch).step_by(self.channels).zip(values) {
            *dst = *v;
        }
    }

    /// `chirps × channels` block of one frame.
    pub fn frame(&self, f: usize) -> &[Complex64] {
        let n = self.chirps * self.channels;
        &self.data[f * n..(f + 1) * n]
    }

    /// Per-channel DC compensation; returns the per-channel outcomes.
    pub fn compensate(&mut self, mode: DcMode) -> Vec<DcCorrection> {
        match mode {
            DcMode::Off => Vec::new(),
            DcMode::Capture => (0..self.channels)
                .map(|ch| {
                    let seq = self.channel(ch);
                    let fix = dc_compensate(&seq);
                    self.set_channel(ch, &fix.corrected);
                    fix
                })
                .collect(),
            DcMode::PerFrame => {
                let (chirps, channels) = (self.chirps, self.channels);
                let mut out = Vec::with_capacity(self.frames * channels);
                for f in 0..self.frames {
                    for ch in 0..channels {
                        let base = f * chirps * channels;
                        let seq: Vec<Complex64> = (0..chirps).map(|c| self.data[base + c * channels + ch]).collect();
                        let fix = dc_compensate(&seq);
                        for (c, v) in fix.corrected.iter().enumerate() {
                            self.data[base + c * channels + ch] = *v;
                        }
                        out.push(fix);
                    }
                }
                out
            }
        }
    }
}

/// Where the I/Q circle fit runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcMode {
    /// One fit per channel over every chirp of the analyzed frames.
    #[default]
    Capture,
    /// One fit per channel and frame.
    PerFrame,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcCorrection {
    pub corrected: Vec<Complex64>,
    /// `None` when the fit was rejected and the input passed through.
    pub fit: Option<CircleFit>,
    pub warning: Option<String>,
}

/// Arc spanned around `c`: 2π minus the largest angular gap.
fn arc_span(seq: &[Complex64], c: Complex64) -> f64 {
    let mut ang: Vec<f64> = seq.iter().map(|z| (z - c).arg()).collect();
    ang.sort_by(f64::total_cmp);
    let mut gap: f64 = ang.first().zip(ang.last()).map_or(2.0 * PI, |(a, b)| a + 2.0 * PI - b);
    for w in ang.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    2.0 * PI - gap
}

const MIN_ARC: f64 = 0.5;
const MAX_REL_RESIDUAL: f64 = 0.25;

/// Subtracts the fitted circle center. Degenerate or implausible fits
/// (short arcs, residual above a quarter of the radius) pass the input
/// through with a warning instead of failing.
pub fn dc_compensate(seq: &[Complex64]) -> DcCorrection {
    let pass = |why: String| {
        log::warn!("DC compensation skipped: {why}");
        DcCorrection {
            corrected: seq.to_vec(),
            fit: None,
            warning: Some(why),
        }
    };
    let fit = match fit_circle_dc(seq) {
        Ok(f) => f,
        Err(e) => return pass(e.to_string()),
    };
    let c = fit.center();
    if fit.residual > MAX_REL_RESIDUAL * fit.radius {
        return pass(format!(
            "residual {:.3e} too large for radius {:.3e}",
            fit.residual, fit.radius
        ));
    }
    let span = arc_span(seq, c);
    if span < MIN_ARC {
        return pass(format!("arc spans only {span:.3} rad"));
    }
    DcCorrection {
        corrected: seq.iter().map(|z| z - c).collect(),
        fit: Some(fit),
        warning: None,
    }
}
