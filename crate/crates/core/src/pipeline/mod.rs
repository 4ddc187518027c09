//! Config-driven end-to-end run: simulate → point clouds → train →
//! estimate chest → RA/RAE vitals. Every stage reads its inputs from the
//! output directory, so running the stages one by one and running them
//! back to back give identical files.

pub mod config;
pub mod stages;

pub use config::{InterfererSpec, PipelineConfig, ScenarioPreset, SceneSpec, StageConfig, TrainSection};
pub use stages::{
    read_chest, read_summary, run_e2e, run_stage, ChestRecord, ModeSummary, Stage, Summary,
    VitalsRecord, FAILURE_MARKER,
};
