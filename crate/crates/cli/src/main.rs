use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vitalbeam::pipeline::{run_e2e, run_stage, PipelineConfig, ScenarioPreset, Stage};
use vitalbeam::sim::Posture;

/// Radar posture and vital-sign pipeline on simulated FMCW captures.
#[derive(Parser)]
#[command(name = "vitalbeam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the raw data cube
    Simulate(Common),
    /// Detect per-frame point clouds
    Pointcloud(Common),
    /// Train the keypoint network on the training frames
    Train(Common),
    /// Predict key points and the chest direction
    Estimate(Common),
    /// Extract vitals with RA and RAE steering and summarize
    Compare(Common),
    /// Run every stage in order
    E2e(Common),
    /// Print the effective configuration as TOML
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used for anything it omits
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Top-level seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario preset: BAD, OAR or BAR
    #[arg(long)]
    preset: Option<String>,
    /// Total number of frames to simulate
    #[arg(long)]
    frames: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(name) = &self.preset {
            let Some(posture) = Posture::parse(name) else {
                bail!("unknown preset {name:?} (expected BAD, OAR or BAR)");
            };
            let preset = ScenarioPreset::new(posture);
            cfg.set_posture(posture);
            cfg.scene.breathing_frequency = preset.breathing_hz;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(frames) = self.frames {
            cfg.pipeline.frames_total = frames;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (stage, common) = match &cli.command {
        Command::Simulate(c) => (Some(Stage::Simulate), c),
        Command::Pointcloud(c) => (Some(Stage::Pointcloud), c),
        Command::Train(c) => (Some(Stage::Train), c),
        Command::Estimate(c) => (Some(Stage::Estimate), c),
        Command::Compare(c) => (Some(Stage::Compare), c),
        Command::E2e(c) => (None, c),
        Command::Config(c) => {
            print!("{}", c.resolve()?.to_toml()?);
            return Ok(());
        }
    };
    let cfg = common.resolve()?;
    match stage {
        Some(s) => run_stage(s, &cfg, &common.out).with_context(|| format!("stage {} failed", s.name()))?,
        None => run_e2e(&cfg, &common.out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
