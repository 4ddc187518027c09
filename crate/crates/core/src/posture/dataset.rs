use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ellipse::fit_ellipses;
use super::keypoints::{keypoints_from_ellipses, Keypoints};
use super::voxel::{voxelize_projections, Bounds, InputTensor, GRID};
use crate::detect::{accumulate_pointclouds, FrameProcessor, PointCloud};
use crate::error::{Error, Result};
use crate::sim::{
    build_virtual_array, render_silhouette, BodyPose, Noise, Posture, RadarConfig, SceneModel,
    Synthesizer,
};

/// Ellipses allowed when labeling a silhouette (one per body part).
pub const LABEL_ELLIPSES: usize = 9;
/// Silhouette coverage tolerance, meters.
pub const LABEL_TOLERANCE: f64 = 0.03;

/// Ground-truth key points: rendered silhouette → ellipse cover → skeleton.
pub fn aefa_label(scene: &SceneModel) -> Result<Keypoints> {
    let sil = render_silhouette(scene);
    let cover = fit_ellipses(&sil.points, LABEL_ELLIPSES, LABEL_TOLERANCE)?;
    keypoints_from_ellipses(&cover.ellipses, scene.range)
}

/// Projection of the accumulated clouds.
pub fn cloud_tensor(clouds: &[PointCloud], bounds: &Bounds, side: usize) -> InputTensor {
    voxelize_projections(&accumulate_pointclouds(clouds).points, bounds, side)
}

/// How posture samples are synthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    /// Consecutive frames accumulated into one input tensor.
    pub frames_per_sample: usize,
    pub snr_db: f64,
    /// Optional per-sample pose jitter: lateral shift (m) and per-arm
    /// rotation (rad). Zero reproduces a subject standing still.
    pub max_shift: f64,
    pub max_arm: f64,
    pub range: f64,
    pub radar_height: f64,
    pub bounds: Bounds,
    pub side: usize,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            frames_per_sample: 1,
            snr_db: 20.0,
            max_shift: 0.0,
            max_arm: 0.0,
            range: 2.0,
            radar_height: 1.06,
            bounds: Bounds::default(),
            side: GRID,
        }
    }
}

/// One sample: the posture's capture and the first frame it accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRef {
    pub posture: Posture,
    pub frame: usize,
}

/// Frames 0..`train_per_posture` of each posture's capture for training;
/// `test` frames from index `test_start` on, split evenly across postures.
pub fn benchmark_split(train_per_posture: usize, test: usize, test_start: usize) -> (Vec<SampleRef>, Vec<SampleRef>) {
    let train = Posture::ALL
        .iter()
        .flat_map(|&posture| (0..train_per_posture).map(move |frame| SampleRef { posture, frame }))
        .collect();
    let n = Posture::ALL.len();
    let test = Posture::ALL
        .iter()
        .enumerate()
        .flat_map(|(k, &posture)| {
            let count = test / n + usize::from(k < test % n);
            (0..count).map(move |j| SampleRef {
                posture,
                frame: test_start + j,
            })
        })
        .collect();
    (train, test)
}

/// Synthesizes, detects and labels every sample. Each posture has its own
/// capture with noise stream `seed + posture index`; samples of the same
/// posture and frame are identical across calls.
pub fn synthetic_dataset(
    config: &RadarConfig,
    spec: &DatasetSpec,
    samples: &[SampleRef],
    seed: u64,
) -> Result<Vec<(InputTensor, Keypoints)>> {
    if spec.frames_per_sample == 0 {
        return Err(Error::Argument("frames_per_sample must be at least 1".into()));
    }
    let geometry = build_virtual_array(config)?;
    let proc = FrameProcessor::new(config, &geometry, spec.radar_height);
    samples
        .par_iter()
        .map(|s| {
            let k = Posture::ALL.iter().position(|&p| p == s.posture).unwrap_or(0) as u64;
            let pose = if spec.max_shift > 0.0 || spec.max_arm > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a09_e667);
                rng.set_stream(k << 32 | s.frame as u64);
                BodyPose::jittered(s.posture, &mut rng, spec.max_shift, spec.max_arm)
            } else {
                BodyPose::new(s.posture)
            };
            let scene = SceneModel::from_pose(&pose, spec.range, spec.radar_height);
            let synth = Synthesizer::new(config, &geometry, &scene)?;
            let noise = Noise::from_snr_db(spec.snr_db, seed.wrapping_add(k));
            let clouds = (s.frame..s.frame + spec.frames_per_sample)
                .map(|f| proc.process(synth.frame(f, noise).as_ref(), f))
                .collect::<Result<Vec<_>>>()?;
            Ok((cloud_tensor(&clouds, &spec.bounds, spec.side), aefa_label(&scene)?))
        })
        .collect()
}
