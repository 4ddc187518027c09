use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ellipse::{Ellipse, PartLabel};
use crate::error::{Error, Result};

pub const N_KEYPOINTS: usize = 17;
pub const CHEST_INDEX: usize = 2;

pub const KEYPOINT_LABELS: [&str; N_KEYPOINTS] = [
    "head",
    "neck",
    "chest_center",
    "l_shoulder",
    "r_shoulder",
    "l_elbow",
    "r_elbow",
    "l_wrist",
    "r_wrist",
    "pelvis",
    "l_hip",
    "r_hip",
    "l_knee",
    "r_knee",
    "l_ankle",
    "r_ankle",
    "spine_mid",
];

/// 17 labeled body key points in world coordinates (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoints {
    pub coords: [[f64; 3]; N_KEYPOINTS],
}

impl Keypoints {
    pub fn chest(&self) -> [f64; 3] {
        self.coords[CHEST_INDEX]
    }

    pub fn get(&self, label: &str) -> Option<[f64; 3]> {
        KEYPOINT_LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| self.coords[i])
    }

    /// The 51 scalars in label order, (x, y, z) per point.
    pub fn to_flat(&self) -> [f64; 3 * N_KEYPOINTS] {
        let mut out = [0.0; 3 * N_KEYPOINTS];
        for (i, c) in self.coords.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(c);
        }
        out
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 3 * N_KEYPOINTS {
            return Err(Error::Argument(format!(
                "keypoints need {} scalars, got {}",
                3 * N_KEYPOINTS,
                v.len()
            )));
        }
        let mut coords = [[0.0; 3]; N_KEYPOINTS];
        for (i, c) in coords.iter_mut().enumerate() {
            c.copy_from_slice(&v[3 * i..3 * i + 3]);
        }
        Ok(Self { coords })
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().flatten().all(|v| v.is_finite())
    }

    /// Mean Euclidean distance between corresponding points.
    pub fn mean_error(&self, other: &Keypoints) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
            })
            .sum::<f64>()
            / N_KEYPOINTS as f64
    }
}

/// Writes `frame,label,x,y,z` rows.
pub fn write_keypoints_csv<W: Write>(w: W, rows: &[(usize, Keypoints)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["frame", "label", "x", "y", "z"])?;
    for (frame, kp) in rows {
        for (label, c) in KEYPOINT_LABELS.iter().zip(&kp.coords) {
            wtr.write_record([
                frame.to_string(),
                label.to_string(),
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

fn d2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Orders the major-axis endpoints of `e` so the first is nearest `anchor`.
fn ends_from(e: &Ellipse, anchor: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let [p, q] = e.major_endpoints();
    if d2(p, anchor) <= d2(q, anchor) {
        (p, q)
    } else {
        (q, p)
    }
}

/// Maps labeled body-part ellipses onto the 17-point skeleton; `depth` is
/// the y coordinate given to every point.
///
/// Shoulders, hips, elbows and wrists come from limb major-axis endpoints,
/// knees from leg centers, head, chest and pelvis from part centers. Parts
/// that are missing fall back to proportions of the torso.
pub fn keypoints_from_ellipses(ellipses: &[Ellipse], depth: f64) -> Result<Keypoints> {
    let find = |l: PartLabel| ellipses.iter().find(|e| e.label == Some(l));
    let torso = find(PartLabel::Torso)
        .ok_or_else(|| Error::Mapping("no torso ellipse in the labeled set".into()))?;
    let c = torso.center;
    let [p, q] = torso.major_endpoints();
    let (top, bottom) = if p[1] >= q[1] { (p, q) } else { (q, p) };
    let half_width = torso.semi_axes[1];

    let head = find(PartLabel::Head)
        .map(|e| e.center)
        .unwrap_or_else(|| lerp(c, top, 1.45));
    let neck = top;
    let pelvis = find(PartLabel::Pelvis).map(|e| e.center).unwrap_or(bottom);

    let mut shoulder = [[0.0; 2]; 2];
    let mut elbow = [[0.0; 2]; 2];
    let mut wrist = [[0.0; 2]; 2];
    let mut hip = [[0.0; 2]; 2];
    let mut knee = [[0.0; 2]; 2];
    let mut ankle = [[0.0; 2]; 2];
    let sides = [
        (1.0, PartLabel::LeftUpperArm, PartLabel::LeftForearm, PartLabel::LeftLeg),
        (-1.0, PartLabel::RightUpperArm, PartLabel::RightForearm, PartLabel::RightLeg),
    ];
    for (i, (side, ua, fa, leg)) in sides.into_iter().enumerate() {
        let default_shoulder = [c[0] + side * 0.9 * half_width, top[1] - 0.05];
        match (find(ua), find(fa)) {
            (Some(u), fore) => {
                let (s, e) = ends_from(u, default_shoulder);
                shoulder[i] = s;
                match fore {
                    Some(f) => {
                        let (fe, fw) = ends_from(f, e);
                        elbow[i] = lerp(e, fe, 0.5);
                        wrist[i] = fw;
                    }
                    None => {
                        elbow[i] = e;
                        wrist[i] = lerp(s, e, 1.93);
                    }
                }
            }
            (None, Some(f)) => {
                shoulder[i] = default_shoulder;
                let (fe, fw) = ends_from(f, default_shoulder);
                elbow[i] = fe;
                wrist[i] = fw;
            }
            (None, None) => {
                shoulder[i] = default_shoulder;
                elbow[i] = [default_shoulder[0], default_shoulder[1] - 0.30];
                wrist[i] = [default_shoulder[0], default_shoulder[1] - 0.58];
            }
        }
        let default_hip = [c[0] + side * 0.09, bottom[1] - 0.04];
        match find(leg) {
            Some(l) => {
                let (h, a) = ends_from(l, default_hip);
                hip[i] = h;
                knee[i] = l.center;
                ankle[i] = a;
            }
            None => {
                hip[i] = default_hip;
                knee[i] = [default_hip[0], default_hip[1] - 0.45];
                ankle[i] = [default_hip[0], default_hip[1] - 0.90];
            }
        }
    }
    let spine = lerp(c, pelvis, 0.5);
    let pts2 = [
        head,
        neck,
        c,
        shoulder[0],
        shoulder[1],
        elbow[0],
        elbow[1],
        wrist[0],
        wrist[1],
        pelvis,
        hip[0],
        hip[1],
        knee[0],
        knee[1],
        ankle[0],
        ankle[1],
        spine,
    ];
    let mut coords = [[0.0; 3]; N_KEYPOINTS];
    for (dst, p) in coords.iter_mut().zip(pts2) {
        *dst = [p[0], depth, p[1]];
    }
    Ok(Keypoints { coords })
}
