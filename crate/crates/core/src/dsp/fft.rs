use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::{Complex32, Complex64};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rect,
    Hann,
}

impl Window {
    /// Symmetric window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann if n < 2 => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

/// Fast-time FFT with a cached plan and window.
#[derive(Clone)]
pub struct RangeFft {
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
}

impl std::fmt::Debug for RangeFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RangeFft").field("len", &self.window.len()).finish()
    }
}

impl RangeFft {
    pub fn new(n: usize, window: Window) -> Self {
        Self {
            fft: FftPlanner::new().plan_fft_forward(n),
            window: window.coefficients(n),
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Windowed DFT of one chirp; bin k corresponds to range k·Δr.
    ///
    /// Panics if `chirp.len()` differs from the planned length.
    pub fn process(&self, chirp: &[Complex32]) -> Vec<Complex64> {
        assert_eq!(chirp.len(), self.len(), "chirp length mismatch");
        let mut buf: Vec<Complex64> = chirp
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex64::new(s.re as f64 * w, s.im as f64 * w))
            .collect();
        self.fft.process(&mut buf);
        buf
    }

    pub fn process_f64(&self, chirp: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(chirp.len(), self.len(), "chirp length mismatch");
        let mut buf: Vec<Complex64> = chirp.iter().zip(&self.window).map(|(s, w)| s * w).collect();
        self.fft.process(&mut buf);
        buf
    }
}

/// One-off range FFT; prefer [`RangeFft`] inside loops.
pub fn range_fft(chirp: &[Complex64], window: Window) -> Vec<Complex64> {
    RangeFft::new(chirp.len(), window).process_f64(chirp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{build_virtual_array, synthesize_frame, Noise, RadarConfig, SceneModel};

    fn argmax(x: &[Complex64]) -> usize {
        (0..x.len()).max_by(|&a, &b| x[a].norm().total_cmp(&x[b].norm())).unwrap()
    }

    #[test]
    fn ones_give_dc_impulse() {
        let out = range_fft(&vec![Complex64::new(1.0, 0.0); 64], Window::Rect);
        assert!((out[0].re - 64.0).abs() < 1e-9);
        assert!(out[1..].iter().all(|c| c.norm() < 1e-9));
    }

    #[test]
    fn basis_tone_lands_in_its_bin() {
        let x: Vec<Complex64> = (0..64)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * 23.0 * n as f64 / 64.0))
            .collect();
        assert_eq!(argmax(&range_fft(&x, Window::Rect)), 23);
        assert_eq!(argmax(&range_fft(&x, Window::Hann)), 23);
    }

    #[test]
    fn simulated_two_metre_target_in_bin_23() {
        let cfg = RadarConfig::default();
        let geom = build_virtual_array(&cfg).unwrap();
        let mut scene = SceneModel::preset(crate::sim::Posture::Bad);
        scene.scatterers.retain(|s| s.part == crate::sim::BodyPart::Chest);
        scene.scatterers[0].position = [0.0, 2.0, scene.radar_height];
        let frame = synthesize_frame(&cfg, &geom, &scene, 0, Noise::NONE).unwrap();
        let plan = RangeFft::new(cfg.adc_samples_per_chirp, Window::Rect);
        let profile = plan.process(frame.as_ref().chirp(0, 0));
        assert_eq!(argmax(&profile), 23);
    }

    #[test]
    fn hann_is_symmetric_and_zero_ended() {
        let w = Window::Hann.coefficients(9);
        assert_eq!(w[0], 0.0);
        assert!((w[4] - 1.0).abs() < 1e-12);
        for k in 0..9 {
            assert!((w[k] - w[8 - k]).abs() < 1e-12);
        }
    }
}
