use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::array::ArrayGeometry;
use super::config::RadarConfig;
use super::cube::{DataCube, Frame};
use super::scene::{BodyPart, ChestMotion, SceneModel};
use crate::error::{Error, Result};

/// Complex white noise: `std` is the RMS magnitude per complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub std: f64,
    pub seed: u64,
}

impl Noise {
    pub const NONE: Noise = Noise { std: 0.0, seed: 0 };

    /// Noise giving `snr_db` relative to a unit-reflectivity return.
    pub fn from_snr_db(snr_db: f64, seed: u64) -> Self {
        Self {
            std: 10f64.powf(-snr_db / 20.0),
            seed,
        }
    }
}

struct Target {
    reflectivity: f64,
    rest_range: f64,
    /// far-field steering phase per virtual element, exp(j 2π/λ p·u)
    steering: Vec<Complex64>,
    motion: Motion,
}

enum Motion {
    Static,
    Chest,
    Oscillating(super::scene::Oscillation),
}

/// Dechirped point-scatterer model of a TDM-MIMO FMCW radar.
///
/// For a scatterer at range R seen along unit direction u, virtual element
/// p receives a tone at f_b = 2·S·R/c with carrier phase 4πR/λ and steering
/// phase 2π/λ·(p·u). Fast time is referenced to the center of the ADC
/// window. TX slots within a chirp are treated as simultaneous.
pub struct Synthesizer<'a> {
    config: &'a RadarConfig,
    channels: usize,
    targets: Vec<Target>,
    chest_motion: ChestMotion,
    offsets: Vec<(Complex64, f64)>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(config: &'a RadarConfig, geometry: &ArrayGeometry, scene: &SceneModel) -> Result<Self> {
        config.validate()?;
        scene.validate()?;
        if geometry.len() != config.n_virtual() {
            return Err(Error::Config(format!(
                "geometry has {} elements, config expects {}",
                geometry.len(),
                config.n_virtual()
            )));
        }
        let mut targets = Vec::with_capacity(scene.scatterers.len());
        for s in &scene.scatterers {
            let rel = [s.position[0], s.position[1], s.position[2] - scene.radar_height];
            if rel[1] <= 0.0 {
                return Err(Error::Scene(format!(
                    "{:?} scatterer at y = {} is not in front of the array",
                    s.part, s.position[1]
                )));
            }
            let range = (rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]).sqrt();
            let u = rel.map(|c| c / range);
            let steering = geometry.steering_toward(u);
            let motion = if s.part == BodyPart::Chest {
                Motion::Chest
            } else if let Some(o) = s.oscillation {
                Motion::Oscillating(o)
            } else {
                Motion::Static
            };
            targets.push(Target {
                reflectivity: s.reflectivity,
                rest_range: range,
                steering,
                motion,
            });
        }
        let mut offsets = Vec::new();
        if !scene.iq_offsets.is_empty() {
            if scene.iq_offsets.len() != config.n_virtual() {
                return Err(Error::Scene(format!(
                    "{} iq_offsets given for {} channels",
                    scene.iq_offsets.len(),
                    config.n_virtual()
                )));
            }
            if let Some(chest) = targets.iter().find(|t| matches!(t.motion, Motion::Chest)) {
                let fb = config.beat_frequency(chest.rest_range);
                offsets = scene
                    .iq_offsets
                    .iter()
                    .map(|o| (Complex64::new(o[0], o[1]), fb))
                    .collect();
            }
        }
        Ok(Self {
            config,
            channels: geometry.len(),
            targets,
            chest_motion: ChestMotion::from_scene(scene),
            offsets,
        })
    }

    /// Start time of a chirp in seconds.
    pub fn chirp_time(&self, frame_index: usize, chirp: usize) -> f64 {
        frame_index as f64 * self.config.frame_duration + chirp as f64 * self.config.chirp_period()
    }

    pub fn frame(&self, frame_index: usize, noise: Noise) -> Frame {
        let cfg = self.config;
        let n = cfg.adc_samples_per_chirp;
        let chirps = cfg.chirps_per_frame;
        let mut frame = Frame::zeros(chirps, self.channels, n);
        let center = (n as f64 - 1.0) / 2.0;
        let k4 = 4.0 * PI / cfg.wavelength();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.channels * n];
        let mut tone = vec![Complex64::new(0.0, 0.0); n];

        let add_tone = |acc: &mut [Complex64], tone: &mut [Complex64], fb: f64, start: Complex64, per_channel: &dyn Fn(usize) -> Complex64| {
            let step = Complex64::from_polar(1.0, 2.0 * PI * fb / cfg.adc_sample_rate);
            let mut ph = start * Complex64::from_polar(1.0, -2.0 * PI * fb * center / cfg.adc_sample_rate);
            for t in tone.iter_mut() {
                *t = ph;
                ph *= step;
            }
            for ch in 0..self.channels {
                let w = per_channel(ch);
                for (a, t) in acc[ch * n..(ch + 1) * n].iter_mut().zip(tone.iter()) {
                    *a += w * t;
                }
            }
        };

        for chirp in 0..chirps {
            acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            let t = self.chirp_time(frame_index, chirp);
            for target in &self.targets {
                let d = match &target.motion {
                    Motion::Static => 0.0,
                    Motion::Chest => self.chest_motion.displacement(t),
                    Motion::Oscillating(o) => o.displacement(t),
                };
                let range = target.rest_range + d;
                let start = Complex64::from_polar(target.reflectivity, k4 * range);
                add_tone(&mut acc, &mut tone, cfg.beat_frequency(range), start, &|ch| {
                    target.steering[ch]
                });
            }
            for (ch, (offset, fb)) in self.offsets.iter().enumerate() {
                let step = Complex64::from_polar(1.0, 2.0 * PI * fb / cfg.adc_sample_rate);
                let mut ph = *offset * Complex64::from_polar(1.0, -2.0 * PI * fb * center / cfg.adc_sample_rate);
                for a in &mut acc[ch * n..(ch + 1) * n] {
                    *a += ph;
                    ph *= step;
                }
            }
            let base = chirp * self.channels * n;
            for (dst, src) in frame.data[base..base + self.channels * n].iter_mut().zip(&acc) {
                *dst = Complex32::new(src.re as f32, src.im as f32);
            }
        }

        if noise.std > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(frame_index as u64);
            let normal = Normal::new(0.0, noise.std / std::f64::consts::SQRT_2).unwrap();
            for s in &mut frame.data {
                let re = normal.sample(&mut rng);
                let im = normal.sample(&mut rng);
                *s += Complex32::new(re as f32, im as f32);
            }
        }
        frame
    }
}

pub fn synthesize_frame(
    config: &RadarConfig,
    geometry: &ArrayGeometry,
    scene: &SceneModel,
    frame_index: usize,
    noise: Noise,
) -> Result<Frame> {
    Ok(Synthesizer::new(config, geometry, scene)?.frame(frame_index, noise))
}

/// Frames at timestamps `frame_duration` apart, starting at frame 0.
pub fn synthesize_capture(
    config: &RadarConfig,
    geometry: &ArrayGeometry,
    scene: &SceneModel,
    n_frames: usize,
    noise: Noise,
) -> Result<DataCube> {
    if n_frames == 0 {
        return Err(Error::Argument("capture needs at least one frame".into()));
    }
    let synth = Synthesizer::new(config, geometry, scene)?;
    let frames: Vec<Frame> = (0..n_frames)
        .into_par_iter()
        .map(|i| synth.frame(i, noise))
        .collect();
    DataCube::from_frames(config, frames)
}
