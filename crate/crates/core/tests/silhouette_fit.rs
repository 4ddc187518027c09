use vitalbeam::posture::{fit_ellipses, keypoints_from_ellipses, PartLabel};
use vitalbeam::sim::{render_silhouette, Posture, SceneModel};

#[test]
fn torso_center_tracks_chest() {
    for posture in Posture::ALL {
        let scene = SceneModel::preset(posture);
        let sil = render_silhouette(&scene);
        let t0 = std::time::Instant::now();
        let cover = fit_ellipses(&sil.points, 9, 0.03).unwrap();
        let torso = cover
            .ellipses
            .iter()
            .find(|e| e.label == Some(PartLabel::Torso))
            .unwrap();
        let chest = sil.keypoints.chest();
        let err = ((torso.center[0] - chest[0]).powi(2) + (torso.center[1] - chest[2]).powi(2)).sqrt();
        let kp = keypoints_from_ellipses(&cover.ellipses, scene.range).unwrap();
        eprintln!(
            "{:?}: {} ellipses rms {:.4} max {:.4} torso err {:.4} kp err {:.4} ({:?})",
            posture,
            cover.ellipses.len(),
            cover.rms_residual,
            cover.max_residual,
            err,
            kp.mean_error(&sil.keypoints),
            t0.elapsed()
        );
        for e in &cover.ellipses {
            eprintln!("   {:?} c=({:.3},{:.3}) ab=({:.3},{:.3}) rot={:.2}", e.label, e.center[0], e.center[1], e.semi_axes[0], e.semi_axes[1], e.rotation);
        }
        assert!(err < 0.05, "{posture:?} torso center off by {err}");
    }
}
