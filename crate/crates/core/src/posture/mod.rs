//! Ellipse-fit body labels, point-cloud projections and the keypoint CNN.

pub mod chest;
pub mod cnn;
pub mod dataset;
pub mod ellipse;
pub mod io;
pub mod keypoints;
pub mod train;
pub mod voxel;

pub use chest::{chest_from_keypoints, chest_from_point, ChestAngles};
pub use cnn::{cnn_loss, Architecture, Mode, Network};
pub use dataset::{aefa_label, benchmark_split, cloud_tensor, synthetic_dataset, DatasetSpec, SampleRef};
pub use ellipse::{fit_ellipses, Ellipse, EllipseCover, PartLabel};
pub use io::{load_network, read_network, save_network, write_network};
pub use keypoints::{
    keypoints_from_ellipses, write_keypoints_csv, Keypoints, CHEST_INDEX, KEYPOINT_LABELS, N_KEYPOINTS,
};
pub use train::{evaluate, init_network, train, train_from, Optimizer, TrainConfig};
pub use voxel::{voxelize_projections, Bounds, InputTensor, GRID};
