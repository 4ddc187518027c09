//! Parametric articulated body used both for scatterer placement and for
//! the 2D silhouette that feeds the ellipse-fitting labeler.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::posture::ellipse::{Ellipse, PartLabel};
use crate::sim::scene::{BodyPart, Scatterer};

/// Arm posture of a standing subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Posture {
    /// both arms down
    #[serde(rename = "BAD")]
    Bad,
    /// one (right) arm raised
    #[serde(rename = "OAR")]
    Oar,
    /// both arms raised
    #[serde(rename = "BAR")]
    Bar,
}

impl Posture {
    pub const ALL: [Posture; 3] = [Posture::Bad, Posture::Oar, Posture::Bar];

    /// Reference heart rate for the posture's scenario, Hz.
    pub fn heart_rate(self) -> f64 {
        match self {
            Posture::Bad => 1.10,
            Posture::Oar => 1.25,
            Posture::Bar => 1.41,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Posture::Bad => "BAD",
            Posture::Oar => "OAR",
            Posture::Bar => "BAR",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BAD" => Some(Posture::Bad),
            "OAR" => Some(Posture::Oar),
            "BAR" => Some(Posture::Bar),
            _ => None,
        }
    }

    /// (upper arm, forearm) angles from straight down, radians, for the
    /// subject's (left, right) arm.
    fn arm_angles(self) -> [(f64, f64); 2] {
        let down = (15f64.to_radians(), 10f64.to_radians());
        let up = (165f64.to_radians(), 170f64.to_radians());
        match self {
            Posture::Bad => [down, down],
            Posture::Oar => [down, up],
            Posture::Bar => [up, up],
        }
    }
}

// Body dimensions, meters.
const TORSO_CENTER_Z: f64 = 1.27;
const TORSO_HALF_HEIGHT: f64 = 0.32;
const TORSO_HALF_WIDTH: f64 = 0.16;
const HEAD_HALF_HEIGHT: f64 = 0.12;
const HEAD_HALF_WIDTH: f64 = 0.09;
const NECK_GAP: f64 = 0.02;
const SHOULDER_X: f64 = 0.15;
const SHOULDER_DROP: f64 = 0.05;
const UPPER_ARM: f64 = 0.30;
const FOREARM: f64 = 0.28;
const UPPER_ARM_HALF_WIDTH: f64 = 0.045;
const FOREARM_HALF_WIDTH: f64 = 0.04;
const PELVIS_HALF_WIDTH: f64 = 0.17;
const PELVIS_HALF_HEIGHT: f64 = 0.09;
const PELVIS_RISE: f64 = 0.02;
const HIP_X: f64 = 0.09;
const HIP_DROP: f64 = 0.04;
const LEG: f64 = 0.90;
const LEG_HALF_WIDTH: f64 = 0.065;
const LEG_SPLAY: f64 = 0.0524; // 3 degrees

/// Pose of the articulated body. The subject faces the array, so the
/// subject's left side lies at +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPose {
    pub posture: Posture,
    pub lateral_offset: f64,
    /// Extra rotation of the (left, right) arm, radians, applied to both
    /// segments and directed away from the body.
    pub arm_offsets: [f64; 2],
}

/// 2D joint positions (x, z) of a pose.
#[derive(Debug, Clone, Copy)]
pub struct Joints {
    pub shoulder: [[f64; 2]; 2],
    pub elbow: [[f64; 2]; 2],
    pub wrist: [[f64; 2]; 2],
    pub hip: [[f64; 2]; 2],
    pub ankle: [[f64; 2]; 2],
}

impl BodyPose {
    pub fn new(posture: Posture) -> Self {
        Self {
            posture,
            lateral_offset: 0.0,
            arm_offsets: [0.0; 2],
        }
    }

    /// Random variation used to build training sets: lateral shift up to
    /// `max_shift` and arm rotation up to `max_arm` radians.
    pub fn jittered<R: Rng>(posture: Posture, rng: &mut R, max_shift: f64, max_arm: f64) -> Self {
        let shift = if max_shift > 0.0 {
            rng.gen_range(-max_shift..=max_shift)
        } else {
            0.0
        };
        let mut arm = [0.0; 2];
        if max_arm > 0.0 {
            for a in &mut arm {
                *a = rng.gen_range(-max_arm..=max_arm);
            }
        }
        Self {
            posture,
            lateral_offset: shift,
            arm_offsets: arm,
        }
    }

    pub fn chest_xz(&self) -> [f64; 2] {
        [self.lateral_offset, TORSO_CENTER_Z]
    }

    pub fn joints(&self) -> Joints {
        let x0 = self.lateral_offset;
        let torso_top = TORSO_CENTER_Z + TORSO_HALF_HEIGHT;
        let torso_bottom = TORSO_CENTER_Z - TORSO_HALF_HEIGHT;
        let angles = self.posture.arm_angles();
        let mut j = Joints {
            shoulder: [[0.0; 2]; 2],
            elbow: [[0.0; 2]; 2],
            wrist: [[0.0; 2]; 2],
            hip: [[0.0; 2]; 2],
            ankle: [[0.0; 2]; 2],
        };
        for (i, side) in [1.0, -1.0].into_iter().enumerate() {
            let (upper, fore) = angles[i];
            let (upper, fore) = (upper + self.arm_offsets[i], fore + self.arm_offsets[i]);
            let s = [x0 + side * SHOULDER_X, torso_top - SHOULDER_DROP];
            let e = [
                s[0] + side * UPPER_ARM * upper.sin(),
                s[1] - UPPER_ARM * upper.cos(),
            ];
            let w = [
                e[0] + side * FOREARM * fore.sin(),
                e[1] - FOREARM * fore.cos(),
            ];
            let h = [x0 + side * HIP_X, torso_bottom - HIP_DROP];
            let a = [
                h[0] + side * LEG * LEG_SPLAY.sin(),
                h[1] - LEG * LEG_SPLAY.cos(),
            ];
            j.shoulder[i] = s;
            j.elbow[i] = e;
            j.wrist[i] = w;
            j.hip[i] = h;
            j.ankle[i] = a;
        }
        j
    }

    /// The nine labeled body-part ellipses in the (x, z) plane.
    pub fn parts(&self) -> Vec<Ellipse> {
        let x0 = self.lateral_offset;
        let j = self.joints();
        let torso_top = TORSO_CENTER_Z + TORSO_HALF_HEIGHT;
        let torso_bottom = TORSO_CENTER_Z - TORSO_HALF_HEIGHT;
        let vertical = std::f64::consts::FRAC_PI_2;
        let mut parts = vec![
            Ellipse::new(
                [x0, torso_top + NECK_GAP + HEAD_HALF_HEIGHT],
                HEAD_HALF_HEIGHT,
                HEAD_HALF_WIDTH,
                vertical,
            )
            .labeled(PartLabel::Head),
            Ellipse::new(
                [x0, TORSO_CENTER_Z],
                TORSO_HALF_HEIGHT,
                TORSO_HALF_WIDTH,
                vertical,
            )
            .labeled(PartLabel::Torso),
            Ellipse::new(
                [x0, torso_bottom + PELVIS_RISE],
                PELVIS_HALF_WIDTH,
                PELVIS_HALF_HEIGHT,
                0.0,
            )
            .labeled(PartLabel::Pelvis),
        ];
        let labels = [
            (PartLabel::LeftUpperArm, PartLabel::LeftForearm, PartLabel::LeftLeg),
            (PartLabel::RightUpperArm, PartLabel::RightForearm, PartLabel::RightLeg),
        ];
        for (i, (ua, fa, leg)) in labels.into_iter().enumerate() {
            parts.push(Ellipse::from_segment(j.shoulder[i], j.elbow[i], UPPER_ARM_HALF_WIDTH).labeled(ua));
            parts.push(Ellipse::from_segment(j.elbow[i], j.wrist[i], FOREARM_HALF_WIDTH).labeled(fa));
            parts.push(Ellipse::from_segment(j.hip[i], j.ankle[i], LEG_HALF_WIDTH).labeled(leg));
        }
        parts
    }

    /// Point scatterers on the front surface of the body (y = `range`).
    pub fn scatterers(&self, range: f64) -> Vec<Scatterer> {
        let x0 = self.lateral_offset;
        let j = self.joints();
        let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let at = |part: BodyPart, p: [f64; 2], reflectivity: f64| Scatterer {
            part,
            position: [p[0], range, p[1]],
            reflectivity,
            oscillation: None,
        };
        let torso_top = TORSO_CENTER_Z + TORSO_HALF_HEIGHT;
        let torso_bottom = TORSO_CENTER_Z - TORSO_HALF_HEIGHT;
        let mut s = vec![
            at(BodyPart::Chest, [x0, TORSO_CENTER_Z], 1.0),
            at(
                BodyPart::Head,
                [x0, torso_top + NECK_GAP + HEAD_HALF_HEIGHT],
                0.35,
            ),
            at(BodyPart::Pelvis, [x0, torso_bottom + PELVIS_RISE], 0.5),
        ];
        let sides = [
            (
                BodyPart::LeftUpperArm,
                BodyPart::LeftForearm,
                BodyPart::LeftHand,
                BodyPart::LeftKnee,
                BodyPart::LeftAnkle,
            ),
            (
                BodyPart::RightUpperArm,
                BodyPart::RightForearm,
                BodyPart::RightHand,
                BodyPart::RightKnee,
                BodyPart::RightAnkle,
            ),
        ];
        for (i, (ua, fa, hand, knee, ankle)) in sides.into_iter().enumerate() {
            s.push(at(ua, mid(j.shoulder[i], j.elbow[i]), 0.3));
            s.push(at(fa, mid(j.elbow[i], j.wrist[i]), 0.25));
            s.push(at(hand, j.wrist[i], 0.2));
            s.push(at(knee, mid(j.hip[i], j.ankle[i]), 0.35));
            s.push(at(ankle, j.ankle[i], 0.2));
        }
        s
    }
}
