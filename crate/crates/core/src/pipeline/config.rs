use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::posture::{Optimizer, TrainConfig};
use crate::sim::body::BodyPose;
use crate::sim::scene::BREATHING_BAND;
use crate::sim::{Oscillation, Posture, RadarConfig, Scatterer, SceneModel};
use crate::vitals::VitalsConfig;

/// Named scenario: a posture with its reference rates and frame split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub posture: Posture,
    pub heart_hz: f64,
    pub breathing_hz: f64,
    pub frames_total: usize,
    pub frames_train: usize,
}

impl ScenarioPreset {
    pub fn new(posture: Posture) -> Self {
        Self {
            posture,
            heart_hz: posture.heart_rate(),
            breathing_hz: 0.30,
            frames_total: 350,
            frames_train: 150,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames_train >= self.frames_total {
            return Err(Error::Config(format!(
                "frames_train {} must be below frames_total {}",
                self.frames_train, self.frames_total
            )));
        }
        let in_band = |f: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&f);
        if !in_band(self.breathing_hz, BREATHING_BAND) || !in_band(self.heart_hz, crate::sim::scene::HEART_BAND) {
            return Err(Error::Config("preset rates outside the vital-sign bands".into()));
        }
        Ok(())
    }
}

/// Subject description; expands to a [`SceneModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub posture: Posture,
    /// Subject distance from the array, m.
    pub range: f64,
    pub radar_height: f64,
    pub lateral_offset: f64,
    pub arm_offsets: [f64; 2],
    pub breathing_frequency: f64,
    pub breathing_amplitude: f64,
    /// Defaults to the posture's reference rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heart_frequency: Option<f64>,
    pub heart_amplitude: f64,
    pub rbm_amplitude: f64,
    pub rbm_band: (f64, f64),
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub iq_offsets: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub interferers: Vec<InterfererSpec>,
    /// Replaces the articulated body when given (`[]` = empty scene).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<Vec<Scatterer>>,
}

/// Oscillating clutter at the chest's slant range and azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfererSpec {
    pub elevation_deg: f64,
    pub reflectivity: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let base = SceneModel::preset(Posture::Bad);
        Self {
            posture: Posture::Bad,
            range: base.range,
            radar_height: base.radar_height,
            lateral_offset: 0.0,
            arm_offsets: [0.0; 2],
            breathing_frequency: base.breathing_frequency,
            breathing_amplitude: base.breathing_amplitude,
            heart_frequency: None,
            heart_amplitude: base.heart_amplitude,
            rbm_amplitude: base.rbm_amplitude,
            rbm_band: base.rbm_band,
            iq_offsets: Vec::new(),
            interferers: Vec::new(),
            scatterers: None,
        }
    }
}

impl SceneSpec {
    pub fn heart_truth(&self) -> f64 {
        self.heart_frequency.unwrap_or(self.posture.heart_rate())
    }

    pub fn build(&self, rbm_seed: u64) -> Result<SceneModel> {
        let pose = BodyPose {
            posture: self.posture,
            lateral_offset: self.lateral_offset,
            arm_offsets: self.arm_offsets,
        };
        let mut scene = SceneModel::from_pose(&pose, self.range, self.radar_height);
        if let Some(s) = &self.scatterers {
            scene.scatterers = s.clone();
        }
        scene.breathing_frequency = self.breathing_frequency;
        scene.breathing_amplitude = self.breathing_amplitude;
        scene.heart_frequency = self.heart_truth();
        scene.heart_amplitude = self.heart_amplitude;
        scene.rbm_amplitude = self.rbm_amplitude;
        scene.rbm_band = self.rbm_band;
        scene.rbm_seed = rbm_seed;
        scene.iq_offsets = self.iq_offsets.clone();
        for i in &self.interferers {
            scene.add_interferer(
                i.elevation_deg,
                i.reflectivity,
                Oscillation {
                    amplitude: i.amplitude,
                    frequency: i.frequency,
                    phase: 0.0,
                },
            )?;
        }
        scene.validate()?;
        Ok(scene)
    }
}

/// Training hyper-parameters; the seed comes from the top-level seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_rate: f64,
    pub optimizer: Optimizer,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            epochs: t.epochs,
            dropout_rate: t.dropout_rate,
            optimizer: t.optimizer,
        }
    }
}

impl TrainSection {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            dropout_rate: self.dropout_rate,
            optimizer: self.optimizer,
        }
    }
}

/// Frame split and capture noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfig {
    pub frames_total: usize,
    /// Frames 0..frames_train train the network; the rest feed vitals.
    pub frames_train: usize,
    /// Frames after the training split whose predictions are averaged into
    /// the chest estimate.
    pub estimate_frames: usize,
    pub snr_db: f64,
    pub noiseless: bool,
}

impl Default for StageConfig {
    fn default() -> Self {
        let p = ScenarioPreset::new(Posture::Bad);
        Self {
            frames_total: p.frames_total,
            frames_train: p.frames_train,
            estimate_frames: 50,
            snr_db: 20.0,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub radar: RadarConfig,
    pub scene: SceneSpec,
    pub train: TrainSection,
    pub vitals: VitalsConfig,
    pub pipeline: StageConfig,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl PipelineConfig {
    pub fn from_preset(preset: ScenarioPreset, seed: u64) -> Self {
        let mut cfg = Self {
            seed,
            ..Self::default()
        };
        cfg.scene.posture = preset.posture;
        cfg.scene.breathing_frequency = preset.breathing_hz;
        cfg.scene.heart_frequency = Some(preset.heart_hz);
        cfg.pipeline.frames_total = preset.frames_total;
        cfg.pipeline.frames_train = preset.frames_train;
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    /// Seed of one named random stream, derived from the top-level seed.
    pub fn stream_seed(&self, name: &str) -> u64 {
        name.bytes()
            .fold(splitmix64(self.seed), |h, b| splitmix64(h ^ u64::from(b)))
    }

    /// Sets the posture and its reference heart rate.
    pub fn set_posture(&mut self, posture: Posture) {
        self.scene.posture = posture;
        self.scene.heart_frequency = Some(posture.heart_rate());
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.train.with_seed(0).validate()?;
        let p = &self.pipeline;
        if p.frames_total == 0 {
            return Err(Error::Config("frames_total must be at least 1".into()));
        }
        if p.frames_train == 0 || p.frames_train + p.estimate_frames > p.frames_total || p.estimate_frames == 0 {
            return Err(Error::Config(format!(
                "need 0 < frames_train ({}) and 0 < estimate_frames ({}) with their sum <= frames_total ({})",
                p.frames_train, p.estimate_frames, p.frames_total
            )));
        }
        if !p.noiseless && !p.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut cfg = PipelineConfig::from_preset(ScenarioPreset::new(Posture::Oar), 11);
        cfg.scene.interferers.push(InterfererSpec {
            elevation_deg: -20.0,
            reflectivity: 0.2,
            amplitude: 0.5e-3,
            frequency: 0.9,
        });
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.hash().unwrap().len(), 64);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = PipelineConfig::from_toml("seed = 3\n[pipeline]\nframes_total = 120\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.pipeline.frames_total, 120);
        assert_eq!(cfg.radar, RadarConfig::default());
        assert_eq!(cfg.pipeline.frames_train, 150);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn streams_differ_and_repeat() {
        let cfg = PipelineConfig::default();
        assert_ne!(cfg.stream_seed("noise"), cfg.stream_seed("train"));
        assert_eq!(cfg.stream_seed("noise"), cfg.stream_seed("noise"));
        let other = PipelineConfig { seed: 1, ..PipelineConfig::default() };
        assert_ne!(cfg.stream_seed("noise"), other.stream_seed("noise"));
    }

    #[test]
    fn preset_truths() {
        for (p, hr) in [(Posture::Bad, 1.10), (Posture::Oar, 1.25), (Posture::Bar, 1.41)] {
            let preset = ScenarioPreset::new(p);
            preset.validate().unwrap();
            assert_eq!(preset.heart_hz, hr);
            let scene = PipelineConfig::from_preset(preset, 0).scene.build(0).unwrap();
            assert_eq!(scene.heart_frequency, hr);
        }
    }

    #[test]
    fn empty_scene_override() {
        let mut spec = SceneSpec::default();
        spec.scatterers = Some(Vec::new());
        assert!(spec.build(0).unwrap().scatterers.is_empty());
    }
}
