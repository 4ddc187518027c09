use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::{select_range_bin, BinSeries, DcMode};
use super::steering::{beamform_chirps, steering_vector};
use crate::dsp::{
    butterworth_bandpass, diff_phase, filter_apply, papr, peak_pick, spectrum, unwrap_phase,
    BandpassSpec, Spectrum, Window,
};
use crate::error::{Error, Result};
use crate::posture::ChestAngles;
use crate::sim::{ArrayGeometry, DataCube};

/// Band PAPR below this is reported as low confidence.
pub const LOW_CONFIDENCE_PAPR_DB: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamMode {
    /// azimuth-only steering (elevation 0)
    #[serde(rename = "RA")]
    Ra,
    /// azimuth and elevation steering
    #[serde(rename = "RAE")]
    Rae,
}

impl BeamMode {
    pub fn name(self) -> &'static str {
        match self {
            BeamMode::Ra => "ra",
            BeamMode::Rae => "rae",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VitalsConfig {
    pub nfft: usize,
    pub breath_band: [f64; 2],
    pub heart_band: [f64; 2],
    pub filter_order: usize,
    pub dc_mode: DcMode,
    pub range_window: Window,
    pub min_frames: usize,
}

impl Default for VitalsConfig {
    fn default() -> Self {
        Self {
            nfft: 512,
            breath_band: [0.1, 0.5],
            heart_band: [0.8, 1.7],
            filter_order: 5,
            dc_mode: DcMode::Capture,
            range_window: Window::Rect,
            min_frames: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VitalsResult {
    pub mode: BeamMode,
    pub phase_raw: Vec<f64>,
    pub phase_unwrapped: Vec<f64>,
    pub phase_diff: Vec<f64>,
    pub breath_spectrum: Spectrum,
    pub heart_spectrum: Spectrum,
    pub br_hz: f64,
    pub hr_hz: f64,
    pub papr_breath_db: f64,
    pub papr_heart_db: f64,
    pub low_confidence_breath: bool,
    pub low_confidence_heart: bool,
}

/// Phase → unwrap → band filters → spectra → peaks and PAPR.
pub fn extract_vitals(
    frames: &[Complex64],
    sample_rate: f64,
    mode: BeamMode,
    cfg: &VitalsConfig,
) -> Result<VitalsResult> {
    if frames.len() < cfg.min_frames {
        return Err(Error::Argument(format!(
            "{} slow-time samples, need at least {}",
            frames.len(),
            cfg.min_frames
        )));
    }
    if !(sample_rate > 4.0) {
        return Err(Error::Argument(format!(
            "slow-time rate {sample_rate} Hz must exceed 4 Hz"
        )));
    }
    let phase_raw: Vec<f64> = frames.iter().map(|z| z.arg()).collect();
    let phase_unwrapped = unwrap_phase(&phase_raw);
    let phase_diff = diff_phase(&phase_unwrapped)?;

    let band = |b: [f64; 2]| BandpassSpec::new(cfg.filter_order, b[0], b[1], sample_rate);
    let breath_sos = butterworth_bandpass(&band(cfg.breath_band))?;
    let heart_sos = butterworth_bandpass(&band(cfg.heart_band))?;
    // Referencing to the first sample starts the DC-blocking filters in
    // steady state for the initial level, so no step transient is injected.
    let rel = |x: &[f64]| -> Vec<f64> { x.iter().map(|v| v - x[0]).collect() };
    let breath = filter_apply(&breath_sos, &rel(&phase_unwrapped));
    let heart = filter_apply(&heart_sos, &rel(&phase_diff));

    let nfft = cfg.nfft.max(phase_unwrapped.len());
    let breath_spectrum = spectrum(&breath, sample_rate, nfft)?;
    let heart_spectrum = spectrum(&heart, sample_rate, nfft)?;
    let br_hz = peak_pick(&breath_spectrum, cfg.breath_band)?;
    let hr_hz = peak_pick(&heart_spectrum, cfg.heart_band)?;
    let band_papr = |s: &Spectrum, b: [f64; 2]| match papr(s, b) {
        Ok(v) => Ok(v),
        Err(Error::UndefinedMetric(_)) => Ok(0.0),
        Err(e) => Err(e),
    };
    let papr_breath_db = band_papr(&breath_spectrum, cfg.breath_band)?;
    let papr_heart_db = band_papr(&heart_spectrum, cfg.heart_band)?;
    Ok(VitalsResult {
        mode,
        phase_raw,
        phase_unwrapped,
        phase_diff,
        breath_spectrum,
        heart_spectrum,
        br_hz,
        hr_hz,
        papr_breath_db,
        papr_heart_db,
        low_confidence_breath: papr_breath_db < LOW_CONFIDENCE_PAPR_DB,
        low_confidence_heart: papr_heart_db < LOW_CONFIDENCE_PAPR_DB,
    })
}

/// Per-frame mean of the chest-steered chirp outputs.
fn beamform_frames(series: &BinSeries, geometry: &ArrayGeometry, az: f64, el: f64) -> Result<Vec<Complex64>> {
    if series.channels != geometry.len() {
        return Err(Error::Argument(format!(
            "{} channels but {} array elements",
            series.channels,
            geometry.len()
        )));
    }
    let v = steering_vector(geometry, az, el);
    (0..series.frames)
        .map(|f| {
            let d = beamform_chirps(series.frame(f), &v)?;
            Ok(d.iter().sum::<Complex64>() / d.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaRaeComparison {
    pub range_bin: usize,
    pub chest: ChestAngles,
    pub ra: VitalsResult,
    pub rae: VitalsResult,
    /// papr_RAE − papr_RA per band, dB
    pub delta_papr_breath_db: f64,
    pub delta_papr_heart_db: f64,
    /// channels whose DC fit was rejected
    pub dc_warnings: usize,
}

/// Runs the chain with azimuth-only and with azimuth+elevation steering
/// on the same range bin and DC-compensated samples.
pub fn compare_ra_rae(
    cube: &DataCube,
    geometry: &ArrayGeometry,
    frames: Range<usize>,
    chest: ChestAngles,
    cfg: &VitalsConfig,
) -> Result<RaRaeComparison> {
    let bin = select_range_bin(cube, frames.clone(), cfg.range_window)?;
    let mut series = BinSeries::extract(cube, frames, bin, cfg.range_window)?;
    let dc = series.compensate(cfg.dc_mode);
    let fs = cube.config().frame_rate();
    let ra = extract_vitals(
        &beamform_frames(&series, geometry, chest.azimuth, 0.0)?,
        fs,
        BeamMode::Ra,
        cfg,
    )?;
    let rae = extract_vitals(
        &beamform_frames(&series, geometry, chest.azimuth, chest.elevation)?,
        fs,
        BeamMode::Rae,
        cfg,
    )?;
    Ok(RaRaeComparison {
        range_bin: bin,
        chest,
        delta_papr_breath_db: rae.papr_breath_db - ra.papr_breath_db,
        delta_papr_heart_db: rae.papr_heart_db - ra.papr_heart_db,
        ra,
        rae,
        dc_warnings: dc.iter().filter(|d| d.warning.is_some()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const FS: f64 = 1.0 / 0.24;

    fn phasor(f: impl Fn(f64) -> f64, n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, f(k as f64 / FS))).collect()
    }

    #[test]
    fn recovers_two_tones() {
        let lambda = 3.8961e-3;
        let k = 4.0 * PI / lambda;
        let d = phasor(
            |t| k * (1e-3 * (2.0 * PI * 0.3 * t).sin() + 0.1e-3 * (2.0 * PI * 1.1 * t).sin()) + 0.4,
            200,
        );
        let r = extract_vitals(&d, FS, BeamMode::Rae, &VitalsConfig::default()).unwrap();
        let bin = FS / 200.0;
        assert!((r.br_hz - 0.3).abs() <= bin, "br {}", r.br_hz);
        assert!((r.hr_hz - 1.1).abs() <= bin, "hr {}", r.hr_hz);
        assert!(!r.low_confidence_heart);
    }

    #[test]
    fn static_scene_is_low_confidence() {
        let d = vec![Complex64::new(0.3, 0.2); 200];
        let r = extract_vitals(&d, FS, BeamMode::Ra, &VitalsConfig::default()).unwrap();
        assert!(r.low_confidence_breath && r.low_confidence_heart);
        assert!((0.1..=0.5).contains(&r.br_hz));
        assert!((0.8..=1.7).contains(&r.hr_hz));
    }

    #[test]
    fn breathing_tone_is_suppressed_in_heart_branch() {
        let d = phasor(|t| 2.0 * (2.0 * PI * 0.3 * t).sin(), 200);
        let r = extract_vitals(&d, FS, BeamMode::Ra, &VitalsConfig::default()).unwrap();
        let peak = |s: &Spectrum| s.mags.iter().copied().fold(0.0, f64::max);
        let ratio = 10.0 * (peak(&r.heart_spectrum) / peak(&r.breath_spectrum)).log10();
        assert!(ratio < -20.0, "{ratio} dB");
    }

    #[test]
    fn argument_errors() {
        let d = vec![Complex64::new(1.0, 0.0); 32];
        assert!(matches!(
            extract_vitals(&d, FS, BeamMode::Ra, &VitalsConfig::default()),
            Err(Error::Argument(_))
        ));
        let d = vec![Complex64::new(1.0, 0.0); 100];
        assert!(matches!(
            extract_vitals(&d, 3.0, BeamMode::Ra, &VitalsConfig::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn common_phase_rotation_is_harmless() {
        let d = phasor(|t| 3.0 * (2.0 * PI * 0.25 * t).sin() + 0.3 * (2.0 * PI * 1.3 * t).sin(), 200);
        let rot: Vec<Complex64> = d.iter().map(|z| z * Complex64::from_polar(1.0, 1.234)).collect();
        let cfg = VitalsConfig::default();
        let a = extract_vitals(&d, FS, BeamMode::Ra, &cfg).unwrap();
        let b = extract_vitals(&rot, FS, BeamMode::Ra, &cfg).unwrap();
        assert_eq!((a.br_hz, a.hr_hz), (b.br_hz, b.hr_hz));
    }
}
