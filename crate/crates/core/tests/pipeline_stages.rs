use std::fs;
use std::path::Path;

use vitalbeam::pipeline::*;
use vitalbeam::sim::{DataCube, Posture};
use vitalbeam::Error;

fn small_config(seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_preset(ScenarioPreset::new(Posture::Bad), seed);
    cfg.radar.chirps_per_frame = 32;
    cfg.pipeline.frames_total = 100;
    cfg.pipeline.frames_train = 30;
    cfg.pipeline.estimate_frames = 10;
    cfg.train.epochs = 2;
    cfg
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn e2e_matches_chained_stages() {
    let cfg = small_config(7);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_e2e(&cfg, a.path()).unwrap();
    for stage in Stage::ALL {
        run_stage(stage, &cfg, b.path()).unwrap();
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    let names: Vec<_> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "cube.vbc",
        "pointcloud.csv",
        "network.vbnn",
        "train_loss.csv",
        "keypoints.csv",
        "chest.toml",
        "spectrum_ra_breath.csv",
        "spectrum_rae_heart.csv",
        "vitals_ra.toml",
        "vitals_rae.toml",
        "compare.csv",
        "summary.toml",
        "manifest.toml",
        "config.toml",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
    assert!(!names.contains(&FAILURE_MARKER));
    assert_eq!(fa, fb);

    let summary = read_summary(a.path()).unwrap();
    assert_eq!(summary.posture, "BAD");
    assert_eq!(summary.vitals_frames, [30, 100]);
    assert_eq!(summary.config_hash, cfg.hash().unwrap());
    let echoed = PipelineConfig::load(&a.path().join("config.toml")).unwrap();
    assert_eq!(echoed, cfg);
    let csv = fs::read_to_string(a.path().join("pointcloud.csv")).unwrap();
    assert!(csv.starts_with(&format!("# config_hash={}\nframe,x,y,z,power\n", summary.config_hash)));
}

#[test]
fn estimate_without_network_names_train_stage() {
    let cfg = small_config(1);
    let dir = tempfile::tempdir().unwrap();
    let err = run_stage(Stage::Estimate, &cfg, dir.path()).unwrap_err();
    match err {
        Error::MissingArtifact { stage, artifact } => {
            assert_eq!(stage, "train");
            assert!(artifact.ends_with("network.vbnn"));
        }
        other => panic!("unexpected {other}"),
    }
    let marker = fs::read_to_string(dir.path().join(FAILURE_MARKER)).unwrap();
    assert!(marker.contains("estimate"));
    assert!(matches!(
        run_stage(Stage::Pointcloud, &cfg, dir.path()),
        Err(Error::MissingArtifact { stage, .. }) if stage == "simulate"
    ));
}

#[test]
fn empty_scene_gives_zero_cube() {
    let mut cfg = small_config(2);
    cfg.scene.scatterers = Some(Vec::new());
    cfg.pipeline.noiseless = true;
    let dir = tempfile::tempdir().unwrap();
    run_stage(Stage::Simulate, &cfg, dir.path()).unwrap();
    let cube = DataCube::load(&dir.path().join("cube.vbc"), &cfg.radar).unwrap();
    assert_eq!(cube.dims(), [100, 32, 12, 64]);
    assert!(cube.samples().iter().all(|s| s.re == 0.0 && s.im == 0.0));
}

#[test]
fn marker_cleared_after_success() {
    let cfg = small_config(3);
    let dir = tempfile::tempdir().unwrap();
    assert!(run_stage(Stage::Compare, &cfg, dir.path()).is_err());
    assert!(dir.path().join(FAILURE_MARKER).exists());
    run_stage(Stage::Simulate, &cfg, dir.path()).unwrap();
    assert!(!dir.path().join(FAILURE_MARKER).exists());
}
