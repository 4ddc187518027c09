use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::body::{BodyPose, Posture};

/// Label attached to a point scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyPart {
    Chest,
    Head,
    Pelvis,
    LeftUpperArm,
    RightUpperArm,
    LeftForearm,
    RightForearm,
    LeftHand,
    RightHand,
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
    Clutter,
}

/// Sinusoidal line-of-sight motion of a non-chest scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Oscillation {
    pub fn displacement(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }
}

/// Point scatterer. `position` is in world coordinates (m): x right,
/// y away from the array, z height above the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub part: BodyPart,
    pub position: [f64; 3],
    pub reflectivity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<Oscillation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneModel {
    pub scatterers: Vec<Scatterer>,
    pub breathing_frequency: f64,
    pub breathing_amplitude: f64,
    pub heart_frequency: f64,
    pub heart_amplitude: f64,
    pub rbm_amplitude: f64,
    pub rbm_seed: u64,
    /// Pass band of the random body motion, Hz.
    #[serde(default = "default_rbm_band")]
    pub rbm_band: (f64, f64),
    pub posture: Posture,
    pub radar_height: f64,
    pub range: f64,
    #[serde(default)]
    pub lateral_offset: f64,
    /// Extra (left, right) arm rotation of the articulated body, radians.
    #[serde(default)]
    pub arm_offsets: [f64; 2],
    /// Per-channel static I/Q offset at the chest range bin, `[re, im]`
    /// relative to unit reflectivity. Empty means none.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iq_offsets: Vec<[f64; 2]>,
}

fn default_rbm_band() -> (f64, f64) {
    (0.02, 0.08)
}

pub const BREATHING_BAND: (f64, f64) = (0.1, 0.5);
pub const HEART_BAND: (f64, f64) = (0.8, 1.7);
pub const CHEST_AMPLITUDE_RANGE: (f64, f64) = (0.01e-3, 12e-3);

impl SceneModel {
    /// Breathing subject in the given posture at the default geometry
    /// (radar 1.06 m above the floor, subject 2 m away).
    pub fn preset(posture: Posture) -> Self {
        let pose = BodyPose::new(posture);
        Self::from_pose(&pose, 2.0, 1.06)
    }

    pub fn from_pose(pose: &BodyPose, range: f64, radar_height: f64) -> Self {
        Self {
            scatterers: pose.scatterers(range),
            breathing_frequency: 0.30,
            breathing_amplitude: 1.0e-3,
            heart_frequency: pose.posture.heart_rate(),
            heart_amplitude: 0.1e-3,
            rbm_amplitude: 0.3e-3,
            rbm_seed: 0,
            rbm_band: default_rbm_band(),
            posture: pose.posture,
            radar_height,
            range,
            lateral_offset: pose.lateral_offset,
            arm_offsets: pose.arm_offsets,
            iq_offsets: Vec::new(),
        }
    }

    /// Scene with no scatterers; synthesizes to pure noise.
    pub fn empty() -> Self {
        Self {
            scatterers: Vec::new(),
            ..Self::preset(Posture::Bad)
        }
    }

    pub fn pose(&self) -> BodyPose {
        BodyPose {
            posture: self.posture,
            lateral_offset: self.lateral_offset,
            arm_offsets: self.arm_offsets,
        }
    }

    pub fn chest(&self) -> Option<&Scatterer> {
        self.scatterers.iter().find(|s| s.part == BodyPart::Chest)
    }

    /// Adds an oscillating clutter scatterer at the chest's slant range and
    /// azimuth but at `elevation_deg` below/above the array.
    pub fn add_interferer(&mut self, elevation_deg: f64, reflectivity: f64, oscillation: Oscillation) -> Result<()> {
        let c = self
            .chest()
            .ok_or_else(|| Error::Scene("interferer needs a chest scatterer".into()))?
            .position;
        let rel = [c[0], c[1], c[2] - self.radar_height];
        let r = (rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]).sqrt();
        let az = rel[0].atan2(rel[1]);
        let el = elevation_deg.to_radians();
        self.scatterers.push(Scatterer {
            part: BodyPart::Clutter,
            position: [
                r * az.sin() * el.cos(),
                r * az.cos() * el.cos(),
                self.radar_height + r * el.sin(),
            ],
            reflectivity,
            oscillation: Some(oscillation),
        });
        Ok(())
    }

    /// Checks the physiological bounds. A scene without scatterers is
    /// accepted as a noise-only scene.
    pub fn validate(&self) -> Result<()> {
        if self.radar_height < 0.0 || !(self.range > 0.0) {
            return Err(Error::Scene("radar_height must be >= 0 and range > 0".into()));
        }
        if self.scatterers.is_empty() {
            return Ok(());
        }
        let chests = self
            .scatterers
            .iter()
            .filter(|s| s.part == BodyPart::Chest)
            .count();
        if chests != 1 {
            return Err(Error::Scene(format!(
                "exactly one chest scatterer required, found {chests}"
            )));
        }
        let in_band = |f: f64, band: (f64, f64)| f >= band.0 && f <= band.1;
        if !in_band(self.breathing_frequency, BREATHING_BAND) {
            return Err(Error::Scene(format!(
                "breathing_frequency {} Hz outside {:?}",
                self.breathing_frequency, BREATHING_BAND
            )));
        }
        if !in_band(self.heart_frequency, HEART_BAND) {
            return Err(Error::Scene(format!(
                "heart_frequency {} Hz outside {:?}",
                self.heart_frequency, HEART_BAND
            )));
        }
        if self.breathing_amplitude < 0.0 || self.heart_amplitude < 0.0 || self.rbm_amplitude < 0.0
        {
            return Err(Error::Scene("motion amplitudes must be non-negative".into()));
        }
        let total = self.breathing_amplitude + self.heart_amplitude + self.rbm_amplitude;
        if total < CHEST_AMPLITUDE_RANGE.0 || total > CHEST_AMPLITUDE_RANGE.1 {
            return Err(Error::Scene(format!(
                "chest displacement amplitude {total:.3e} m outside [0.01, 12] mm"
            )));
        }
        if !(self.rbm_band.0 > 0.0 && self.rbm_band.1 > self.rbm_band.0) {
            return Err(Error::Scene("rbm_band must be increasing and positive".into()));
        }
        Ok(())
    }
}

/// Seeded band-limited random body motion: a sum of sinusoids with random
/// frequencies inside the band whose weights sum to one, so
/// |rbm(t)| <= amplitude.
#[derive(Debug, Clone)]
pub struct RandomBodyMotion {
    amplitude: f64,
    components: Vec<(f64, f64, f64)>,
}

const RBM_COMPONENTS: usize = 8;

impl RandomBodyMotion {
    pub fn new(amplitude: f64, band: (f64, f64), seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components: Vec<(f64, f64, f64)> = (0..RBM_COMPONENTS)
            .map(|_| {
                let w: f64 = rng.gen_range(0.5..1.0);
                let f: f64 = rng.gen_range(band.0..band.1);
                let ph: f64 = rng.gen_range(0.0..2.0 * PI);
                (w, f, ph)
            })
            .collect();
        let total: f64 = components.iter().map(|c| c.0).sum();
        for c in &mut components {
            c.0 /= total;
        }
        Self {
            amplitude,
            components,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude
            * self
                .components
                .iter()
                .map(|&(w, f, ph)| w * (2.0 * PI * f * t + ph).sin())
                .sum::<f64>()
    }
}

/// Precomputed chest motion model for a scene.
#[derive(Debug, Clone)]
pub struct ChestMotion {
    breathing: (f64, f64),
    heart: (f64, f64),
    rbm: RandomBodyMotion,
}

impl ChestMotion {
    pub fn from_scene(scene: &SceneModel) -> Self {
        Self {
            breathing: (scene.breathing_amplitude, scene.breathing_frequency),
            heart: (scene.heart_amplitude, scene.heart_frequency),
            rbm: RandomBodyMotion::new(scene.rbm_amplitude, scene.rbm_band, scene.rbm_seed),
        }
    }

    /// Line-of-sight displacement in meters; positive moves away from the array.
    pub fn displacement(&self, t: f64) -> f64 {
        let (ab, fb) = self.breathing;
        let (ah, fh) = self.heart;
        ab * (2.0 * PI * fb * t).sin() + ah * (2.0 * PI * fh * t).sin() + self.rbm.at(t)
    }
}

pub fn chest_displacement(t: f64, scene: &SceneModel) -> f64 {
    ChestMotion::from_scene(scene).displacement(t)
}
