use std::fs;
use std::process::Command;

fn vitalbeam() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vitalbeam"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

const SMALL: &str = "\
seed = 5

[radar]
chirps_per_frame = 32

[train]
epochs = 2

[pipeline]
frames_total = 100
frames_train = 30
estimate_frames = 10
";

#[test]
fn e2e_writes_summary_with_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let out = dir.path().join("run");
    let status = vitalbeam()
        .args(["e2e", "--preset", "OAR", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let echo = vitalbeam()
        .args(["config", "--preset", "OAR", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(echo.status.success());
    let effective = String::from_utf8(echo.stdout).unwrap();
    assert_eq!(fs::read_to_string(out.join("config.toml")).unwrap(), effective);

    let summary = fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("posture = \"OAR\""), "{summary}");
    let cloud = fs::read_to_string(out.join("pointcloud.csv")).unwrap();
    assert!(cloud.starts_with("# config_hash="));
}

#[test]
fn missing_artifact_fails_with_stage_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = vitalbeam()
        .args(["estimate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("train"), "{err}");
    assert!(dir.path().join("STAGE_FAILED").exists());
}

#[test]
fn bad_preset_is_rejected() {
    let out = vitalbeam().args(["config", "--preset", "XYZ"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}
