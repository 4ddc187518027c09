use super::scene::SceneModel;
use crate::posture::ellipse::Ellipse;
use crate::posture::keypoints::{keypoints_from_ellipses, Keypoints};

/// Outline sample spacing, meters.
const OUTLINE_SPACING: f64 = 0.015;

/// Synthetic stand-in for a camera silhouette.
#[derive(Debug, Clone)]
pub struct Silhouette {
    /// Boundary points (x, z) of every body-part outline.
    pub points: Vec<[f64; 2]>,
    pub parts: Vec<Ellipse>,
    pub keypoints: Keypoints,
}

pub fn render_silhouette(scene: &SceneModel) -> Silhouette {
    let parts = scene.pose().parts();
    let mut points = Vec::new();
    for part in &parts {
        let n = ((part.perimeter() / OUTLINE_SPACING).ceil() as usize).max(24);
        points.extend((0..n).map(|i| part.point_at(std::f64::consts::TAU * i as f64 / n as f64)));
    }
    let keypoints = keypoints_from_ellipses(&parts, scene.range)
        .expect("articulated body always has a torso");
    Silhouette {
        points,
        parts,
        keypoints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::body::Posture;
    use crate::sim::scene::BodyPart;

    #[test]
    fn bad_wrists_below_shoulders() {
        let s = render_silhouette(&SceneModel::preset(Posture::Bad));
        let kp = s.keypoints;
        assert!(kp.get("l_wrist").unwrap()[2] < kp.get("l_shoulder").unwrap()[2]);
        assert!(kp.get("r_wrist").unwrap()[2] < kp.get("r_shoulder").unwrap()[2]);
    }

    #[test]
    fn bar_wrists_above_head() {
        let kp = render_silhouette(&SceneModel::preset(Posture::Bar)).keypoints;
        let head = kp.get("head").unwrap()[2];
        assert!(kp.get("l_wrist").unwrap()[2] > head);
        assert!(kp.get("r_wrist").unwrap()[2] > head);
    }

    #[test]
    fn chest_matches_scatterer() {
        for p in Posture::ALL {
            let scene = SceneModel::preset(p);
            let kp = render_silhouette(&scene).keypoints;
            let chest = scene
                .scatterers
                .iter()
                .find(|s| s.part == BodyPart::Chest)
                .unwrap();
            for a in 0..3 {
                assert!((kp.chest()[a] - chest.position[a]).abs() < 1e-9);
            }
            assert_eq!(kp.chest()[0], 0.0);
            assert_eq!(kp.chest()[1], 2.0);
        }
    }

    #[test]
    fn dense_outline() {
        let s = render_silhouette(&SceneModel::preset(Posture::Oar));
        assert!(s.points.len() > 500);
    }
}
