use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used for every range/phase conversion.
///
/// Rounded to 3e8 m/s so that the derived constants (wavelength 3.8961 mm,
/// range bin 8.59 cm) come out as the usual round figures.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Chirp, frame, array and detector parameters shared by simulation and
/// processing. Antenna positions are `[x, y, z]` in half-wavelength units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    pub carrier_frequency: f64,
    pub chirp_slope: f64,
    pub idle_time: f64,
    pub adc_start_time: f64,
    pub ramp_end_time: f64,
    pub adc_sample_rate: f64,
    pub adc_samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    pub frame_duration: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub tx_positions: Vec<[f64; 3]>,
    pub rx_positions: Vec<[f64; 3]>,
    pub cfar_guard: (usize, usize),
    pub cfar_training: (usize, usize),
    pub cfar_threshold_db: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 77e9,
            chirp_slope: 60e12,
            idle_time: 250e-6,
            adc_start_time: 10e-6,
            ramp_end_time: 60e-6,
            adc_sample_rate: 2.2e6,
            adc_samples_per_chirp: 64,
            chirps_per_frame: 256,
            frame_duration: 0.240,
            n_tx: 3,
            n_rx: 4,
            // AWR1843-like: TX0/TX2 on the azimuth line, TX1 raised one
            // half-wavelength in elevation.
            tx_positions: vec![[0.0, 0.0, 0.0], [2.0, 0.0, 1.0], [4.0, 0.0, 0.0]],
            rx_positions: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [3.0, 0.0, 0.0],
            ],
            cfar_guard: (8, 8),
            cfar_training: (8, 8),
            cfar_threshold_db: 10.0,
        }
    }
}

impl RadarConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn n_virtual(&self) -> usize {
        self.n_tx * self.n_rx
    }

    /// Time from one chirp start to the next.
    pub fn chirp_period(&self) -> f64 {
        self.idle_time + self.ramp_end_time
    }

    pub fn adc_window(&self) -> f64 {
        self.adc_samples_per_chirp as f64 / self.adc_sample_rate
    }

    /// Bandwidth actually swept while the ADC is sampling.
    pub fn effective_bandwidth(&self) -> f64 {
        self.chirp_slope * self.adc_window()
    }

    /// Range spanned by one FFT bin: c·f_adc / (2·S·N).
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT * self.adc_sample_rate
            / (2.0 * self.chirp_slope * self.adc_samples_per_chirp as f64)
    }

    /// Slow-time rate when one sample is taken per frame.
    pub fn frame_rate(&self) -> f64 {
        1.0 / self.frame_duration
    }

    pub fn beat_frequency(&self, range: f64) -> f64 {
        2.0 * self.chirp_slope * range / SPEED_OF_LIGHT
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("chirp_slope", self.chirp_slope),
            ("idle_time", self.idle_time),
            ("adc_start_time", self.adc_start_time),
            ("ramp_end_time", self.ramp_end_time),
            ("adc_sample_rate", self.adc_sample_rate),
            ("frame_duration", self.frame_duration),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("adc_samples_per_chirp", self.adc_samples_per_chirp),
            ("chirps_per_frame", self.chirps_per_frame),
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.tx_positions.len() != self.n_tx || self.rx_positions.len() != self.n_rx {
            return Err(Error::Config(format!(
                "expected {} tx and {} rx positions, got {} and {}",
                self.n_tx,
                self.n_rx,
                self.tx_positions.len(),
                self.rx_positions.len()
            )));
        }
        if self.adc_window() > self.ramp_end_time - self.adc_start_time + 1e-15 {
            return Err(Error::Config(format!(
                "ADC window {:.3e} s does not fit the ramp ({:.3e} s after ADC start)",
                self.adc_window(),
                self.ramp_end_time - self.adc_start_time
            )));
        }
        if self.chirps_per_frame as f64 * self.chirp_period() > self.frame_duration {
            return Err(Error::Config("chirps do not fit inside one frame".into()));
        }
        if !self.cfar_threshold_db.is_finite() {
            return Err(Error::Config("cfar_threshold_db must be finite".into()));
        }
        Ok(())
    }
}
