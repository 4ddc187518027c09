use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use crate::detect::{read_pointcloud_csv, write_pointcloud_csv, CloudPoint, FrameProcessor};
use crate::dsp::Spectrum;
use crate::error::{Error, Result};
use crate::posture::{
    aefa_label, chest_from_keypoints, chest_from_point, load_network, save_network, train,
    voxelize_projections, write_keypoints_csv, Architecture, Bounds, ChestAngles, Keypoints, GRID,
};
use crate::sim::{build_virtual_array, synthesize_capture, DataCube, Noise, SceneModel};
use crate::vitals::{compare_ra_rae, VitalsResult};

pub const CUBE: &str = "cube.vbc";
pub const SCENE: &str = "scene.toml";
pub const POINTCLOUD: &str = "pointcloud.csv";
pub const NETWORK: &str = "network.vbnn";
pub const TRAIN_LOSS: &str = "train_loss.csv";
pub const KEYPOINTS: &str = "keypoints.csv";
pub const CHEST: &str = "chest.toml";
pub const COMPARE: &str = "compare.csv";
pub const SUMMARY: &str = "summary.toml";
pub const MANIFEST: &str = "manifest.toml";
pub const CONFIG_ECHO: &str = "config.toml";
/// Written when a stage fails; names the stage and the error.
pub const FAILURE_MARKER: &str = "STAGE_FAILED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Simulate,
    Pointcloud,
    Train,
    Estimate,
    Compare,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Simulate,
        Stage::Pointcloud,
        Stage::Train,
        Stage::Estimate,
        Stage::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Pointcloud => "pointcloud",
            Stage::Train => "train",
            Stage::Estimate => "estimate",
            Stage::Compare => "compare",
        }
    }
}

/// Steering angles chosen by `estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChestRecord {
    pub config_hash: String,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Mean predicted chest center, m.
    pub center: [f64; 3],
    /// Frames whose predictions were averaged, `[start, end)`.
    pub frames: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_azimuth_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_elevation_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalsRecord {
    pub config_hash: String,
    pub mode: String,
    pub range_bin: usize,
    pub steer_azimuth_deg: f64,
    pub steer_elevation_deg: f64,
    pub br_hz: f64,
    pub hr_hz: f64,
    pub papr_breath_db: f64,
    pub papr_heart_db: f64,
    pub low_confidence_breath: bool,
    pub low_confidence_heart: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub br_hz: f64,
    pub hr_hz: f64,
    pub br_error_hz: f64,
    pub hr_error_hz: f64,
    pub papr_breath_db: f64,
    pub papr_heart_db: f64,
    /// Estimate within one raw spectral bin of the truth.
    pub br_within_bin: bool,
    pub hr_within_bin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub posture: String,
    pub seed: u64,
    pub vitals_frames: [usize; 2],
    /// Raw bin width f_s / N of the vitals window, Hz.
    pub bin_hz: f64,
    pub truth_br_hz: f64,
    pub truth_hr_hz: f64,
    pub range_bin: usize,
    pub chest_azimuth_deg: f64,
    pub chest_elevation_deg: f64,
    pub dc_warnings: usize,
    pub delta_papr_breath_db: f64,
    pub delta_papr_heart_db: f64,
    pub ra: ModeSummary,
    pub rae: ModeSummary,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
struct ArtifactEntry {
    stage: String,
    config_hash: String,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
struct Manifest {
    config_hash: String,
    artifacts: BTreeMap<String, ArtifactEntry>,
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    hash: String,
    written: Vec<String>,
}

impl<'a> Ctx<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn require(&self, name: &str, stage: Stage) -> Result<PathBuf> {
        let p = self.path(name);
        if !p.is_file() {
            return Err(Error::MissingArtifact {
                artifact: p.display().to_string(),
                stage: stage.name().into(),
            });
        }
        Ok(p)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.path(name), bytes)?;
        self.written.push(name.into());
        Ok(())
    }

    fn write_toml<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, toml::to_string(value)?.as_bytes())
    }

    /// CSV body preceded by a `# config_hash=` comment line.
    fn write_csv(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = format!("# config_hash={}\n", self.hash).into_bytes();
        body(&mut buf)?;
        self.write(name, &buf)
    }

    fn scene(&self) -> Result<SceneModel> {
        self.cfg.scene.build(self.cfg.stream_seed("scene.rbm"))
    }

    fn load_cube(&self) -> Result<DataCube> {
        DataCube::load(&self.require(CUBE, Stage::Simulate)?, &self.cfg.radar)
    }

    fn un_commented(&self, name: &str, producer: Stage) -> Result<Vec<u8>> {
        let text = fs::read(self.require(name, producer)?)?;
        Ok(strip_comment(&text).to_vec())
    }
}

fn strip_comment(text: &[u8]) -> &[u8] {
    if text.first() == Some(&b'#') {
        match text.iter().position(|&b| b == b'\n') {
            Some(i) => &text[i + 1..],
            None => &[],
        }
    } else {
        text
    }
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let scene = ctx.scene()?;
    let geometry = build_virtual_array(&cfg.radar)?;
    let noise = if cfg.pipeline.noiseless {
        Noise::NONE
    } else {
        Noise::from_snr_db(cfg.pipeline.snr_db, cfg.stream_seed("simulate.noise"))
    };
    let cube = synthesize_capture(&cfg.radar, &geometry, &scene, cfg.pipeline.frames_total, noise)?;
    let mut bytes = Vec::new();
    cube.write_to(&mut bytes)?;
    ctx.write(CUBE, &bytes)?;
    ctx.write_toml(SCENE, &scene)
}

fn pointcloud(ctx: &mut Ctx) -> Result<()> {
    let cube = ctx.load_cube()?;
    let geometry = build_virtual_array(&ctx.cfg.radar)?;
    let proc = FrameProcessor::new(&ctx.cfg.radar, &geometry, ctx.cfg.scene.radar_height);
    let clouds: Vec<Vec<CloudPoint>> = (0..cube.n_frames())
        .into_par_iter()
        .map(|f| proc.process(cube.frame(f), f).map(|c| c.points))
        .collect::<Result<_>>()?;
    let points: Vec<CloudPoint> = clouds.into_iter().flatten().collect();
    info!("{} points over {} frames", points.len(), cube.n_frames());
    ctx.write_csv(POINTCLOUD, |buf| write_pointcloud_csv(buf, &points))
}

/// Per-frame points of frames `start..end`.
fn frame_clouds(ctx: &Ctx, start: usize, end: usize) -> Result<Vec<Vec<CloudPoint>>> {
    let body = ctx.un_commented(POINTCLOUD, Stage::Pointcloud)?;
    let mut frames = vec![Vec::new(); end - start];
    for p in read_pointcloud_csv(body.as_slice())? {
        if (start..end).contains(&p.frame) {
            frames[p.frame - start].push(p);
        }
    }
    Ok(frames)
}

fn train_stage(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let n = cfg.pipeline.frames_train;
    let label = aefa_label(&ctx.scene()?)?;
    let bounds = Bounds::default();
    let data: Vec<_> = frame_clouds(ctx, 0, n)?
        .iter()
        .map(|pts| (voxelize_projections(pts, &bounds, GRID), label))
        .collect();
    let tc = cfg.train.with_seed(cfg.stream_seed("train"));
    let (net, history) = train(&Architecture::default(), &data, &tc)?;
    info!(
        "trained on {n} frames: loss {:.3e} -> {:.3e}",
        history.first().copied().unwrap_or(0.0),
        history.last().copied().unwrap_or(0.0)
    );
    save_network(&ctx.path(NETWORK), &net)?;
    ctx.written.push(NETWORK.into());
    ctx.write_csv(TRAIN_LOSS, |buf| {
        writeln!(buf, "epoch,loss")?;
        for (e, l) in history.iter().enumerate() {
            writeln!(buf, "{e},{l}")?;
        }
        Ok(())
    })
}

fn estimate(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let net = load_network(&ctx.require(NETWORK, Stage::Train)?)?;
    let start = cfg.pipeline.frames_train;
    let end = start + cfg.pipeline.estimate_frames;
    let bounds = Bounds::default();
    let rows: Vec<(usize, Keypoints)> = frame_clouds(ctx, start, end)?
        .iter()
        .enumerate()
        .map(|(i, pts)| Ok((start + i, net.predict_keypoints(&voxelize_projections(pts, &bounds, GRID))?)))
        .collect::<Result<_>>()?;
    let mut mean = Keypoints {
        coords: [[0.0; 3]; crate::posture::N_KEYPOINTS],
    };
    for (_, k) in &rows {
        for (m, c) in mean.coords.iter_mut().zip(&k.coords) {
            (0..3).for_each(|j| m[j] += c[j] / rows.len() as f64);
        }
    }
    let h = cfg.scene.radar_height;
    let chest = chest_from_keypoints(&mean, h)?;
    let truth = ctx
        .scene()?
        .chest()
        .and_then(|c| chest_from_point(c.position, h).ok());
    info!("chest estimate az {:.2}° el {:.2}°", chest.azimuth, chest.elevation);
    ctx.write_csv(KEYPOINTS, |buf| write_keypoints_csv(buf, &rows))?;
    let record = ChestRecord {
        config_hash: ctx.hash.clone(),
        azimuth_deg: chest.azimuth,
        elevation_deg: chest.elevation,
        center: mean.chest(),
        frames: [start, end],
        truth_azimuth_deg: truth.map(|t| t.azimuth),
        truth_elevation_deg: truth.map(|t| t.elevation),
    };
    ctx.write_toml(CHEST, &record)
}

fn spectrum_csv(buf: &mut Vec<u8>, s: &Spectrum) -> Result<()> {
    writeln!(buf, "freq_hz,power")?;
    for (f, p) in s.freqs.iter().zip(&s.mags) {
        writeln!(buf, "{f},{p}")?;
    }
    Ok(())
}

fn mode_summary(r: &VitalsResult, br: f64, hr: f64, bin: f64) -> ModeSummary {
    ModeSummary {
        br_hz: r.br_hz,
        hr_hz: r.hr_hz,
        br_error_hz: r.br_hz - br,
        hr_error_hz: r.hr_hz - hr,
        papr_breath_db: r.papr_breath_db,
        papr_heart_db: r.papr_heart_db,
        br_within_bin: (r.br_hz - br).abs() <= bin,
        hr_within_bin: (r.hr_hz - hr).abs() <= bin,
    }
}

fn compare(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let chest: ChestRecord = toml::from_str(&fs::read_to_string(ctx.require(CHEST, Stage::Estimate)?)?)?;
    let cube = ctx.load_cube()?;
    let geometry = build_virtual_array(&cfg.radar)?;
    let frames = cfg.pipeline.frames_train..cfg.pipeline.frames_total;
    let angles = ChestAngles {
        azimuth: chest.azimuth_deg,
        elevation: chest.elevation_deg,
    };
    let cmp = compare_ra_rae(&cube, &geometry, frames.clone(), angles, &cfg.vitals)?;
    let mut table = String::from(
        "mode,br_hz,hr_hz,papr_breath_db,papr_heart_db,low_confidence_breath,low_confidence_heart\n",
    );
    for (r, elevation) in [(&cmp.ra, 0.0), (&cmp.rae, angles.elevation)] {
        let name = r.mode.name();
        ctx.write_csv(&format!("spectrum_{name}_breath.csv"), |b| spectrum_csv(b, &r.breath_spectrum))?;
        ctx.write_csv(&format!("spectrum_{name}_heart.csv"), |b| spectrum_csv(b, &r.heart_spectrum))?;
        let record = VitalsRecord {
            config_hash: ctx.hash.clone(),
            mode: name.to_uppercase(),
            range_bin: cmp.range_bin,
            steer_azimuth_deg: angles.azimuth,
            steer_elevation_deg: elevation,
            br_hz: r.br_hz,
            hr_hz: r.hr_hz,
            papr_breath_db: r.papr_breath_db,
            papr_heart_db: r.papr_heart_db,
            low_confidence_breath: r.low_confidence_breath,
            low_confidence_heart: r.low_confidence_heart,
        };
        ctx.write_toml(&format!("vitals_{name}.toml"), &record)?;
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            record.mode,
            r.br_hz,
            r.hr_hz,
            r.papr_breath_db,
            r.papr_heart_db,
            r.low_confidence_breath,
            r.low_confidence_heart
        ));
    }
    ctx.write_csv(COMPARE, |b| {
        b.extend_from_slice(table.as_bytes());
        Ok(())
    })?;
    let bin = cfg.radar.frame_rate() / frames.len() as f64;
    let (br, hr) = (cfg.scene.breathing_frequency, cfg.scene.heart_truth());
    let summary = Summary {
        config_hash: ctx.hash.clone(),
        posture: cfg.scene.posture.name().into(),
        seed: cfg.seed,
        vitals_frames: [frames.start, frames.end],
        bin_hz: bin,
        truth_br_hz: br,
        truth_hr_hz: hr,
        range_bin: cmp.range_bin,
        chest_azimuth_deg: angles.azimuth,
        chest_elevation_deg: angles.elevation,
        dc_warnings: cmp.dc_warnings,
        delta_papr_breath_db: cmp.delta_papr_breath_db,
        delta_papr_heart_db: cmp.delta_papr_heart_db,
        ra: mode_summary(&cmp.ra, br, hr, bin),
        rae: mode_summary(&cmp.rae, br, hr, bin),
    };
    info!(
        "RAE br {:.4} Hz hr {:.4} Hz (truth {br}, {hr}); Δpapr heart {:+.3} dB",
        summary.rae.br_hz, summary.rae.hr_hz, summary.delta_papr_heart_db
    );
    ctx.write_toml(SUMMARY, &summary)
}

fn update_manifest(ctx: &Ctx, stage: Stage) -> Result<()> {
    let path = ctx.path(MANIFEST);
    let mut manifest: Manifest = fs::read_to_string(&path)
        .ok()
        .and_then(|text| toml::from_str(&text).ok())
        .unwrap_or_default();
    manifest.config_hash = ctx.hash.clone();
    for name in &ctx.written {
        let bytes = fs::read(ctx.path(name))?;
        let producer = if name == CONFIG_ECHO { "config" } else { stage.name() };
        manifest.artifacts.insert(
            name.clone(),
            ArtifactEntry {
                stage: producer.into(),
                config_hash: ctx.hash.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            },
        );
    }
    fs::write(path, toml::to_string(&manifest)?)?;
    Ok(())
}

/// Runs one stage, reading its inputs from and writing its artifacts to
/// `out`. On failure a [`FAILURE_MARKER`] file naming the stage is left
/// next to whatever artifacts were written.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let marker = out.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let hash = cfg.hash()?;
    warn_on_stale(out, &hash);
    let mut ctx = Ctx {
        cfg,
        out,
        hash,
        written: Vec::new(),
    };
    info!("stage {}", stage.name());
    let result = (|| {
        ctx.write(CONFIG_ECHO, cfg.to_toml()?.as_bytes())?;
        match stage {
            Stage::Simulate => simulate(&mut ctx),
            Stage::Pointcloud => pointcloud(&mut ctx),
            Stage::Train => train_stage(&mut ctx),
            Stage::Estimate => estimate(&mut ctx),
            Stage::Compare => compare(&mut ctx),
        }
    })();
    let manifest = update_manifest(&ctx, stage);
    match result {
        Ok(()) => manifest,
        Err(e) => {
            let _ = fs::write(&marker, format!("stage = \"{}\"\nerror = {:?}\n", stage.name(), e.to_string()));
            Err(e)
        }
    }
}

fn warn_on_stale(out: &Path, hash: &str) {
    if let Ok(text) = fs::read_to_string(out.join(MANIFEST)) {
        if let Ok(m) = toml::from_str::<Manifest>(&text) {
            if !m.config_hash.is_empty() && m.config_hash != hash {
                log::warn!("artifacts in {} were produced by a different config", out.display());
            }
        }
    }
}

/// All stages in order; equivalent to invoking each subcommand in turn.
pub fn run_e2e(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    for stage in Stage::ALL {
        run_stage(stage, cfg, out)?;
    }
    Ok(())
}

pub fn read_summary(out: &Path) -> Result<Summary> {
    let path = out.join(SUMMARY);
    if !path.is_file() {
        return Err(Error::MissingArtifact {
            artifact: path.display().to_string(),
            stage: Stage::Compare.name().into(),
        });
    }
    Ok(toml::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_chest(out: &Path) -> Result<ChestRecord> {
    Ok(toml::from_str(&fs::read_to_string(out.join(CHEST))?)?)
}
