use serde::{Deserialize, Serialize};

use super::keypoints::Keypoints;
use crate::error::{Error, Result};

/// Beam-steering direction of the chest, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChestAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

pub fn chest_from_point(p: [f64; 3], radar_height: f64) -> Result<ChestAngles> {
    let dz = p[2] - radar_height;
    let horiz = p[0].hypot(p[1]);
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::UndefinedMetric("chest position is not finite".into()));
    }
    if horiz == 0.0 && dz == 0.0 {
        return Err(Error::UndefinedMetric("chest coincides with the radar".into()));
    }
    Ok(ChestAngles {
        azimuth: p[0].atan2(p[1]).to_degrees(),
        elevation: dz.atan2(horiz).to_degrees(),
    })
}

/// Azimuth and elevation of the chest_center key point seen from the radar.
pub fn chest_from_keypoints(kp: &Keypoints, radar_height: f64) -> Result<ChestAngles> {
    chest_from_point(kp.chest(), radar_height)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(p: [f64; 3]) -> ChestAngles {
        chest_from_point(p, 1.06).unwrap()
    }

    #[test]
    fn boresight() {
        let a = at([0.0, 2.0, 1.06]);
        assert_eq!((a.azimuth, a.elevation), (0.0, 0.0));
    }

    #[test]
    fn raised_chest() {
        assert!((at([0.0, 2.0, 1.26]).elevation - 5.710593).abs() < 1e-5);
    }

    #[test]
    fn lateral_chest() {
        assert!((at([0.5, 2.0, 1.06]).azimuth - 14.036243).abs() < 1e-5);
    }

    #[test]
    fn origin_is_undefined() {
        assert!(matches!(chest_from_point([0.0, 0.0, 1.06], 1.06), Err(Error::UndefinedMetric(_))));
    }
}
