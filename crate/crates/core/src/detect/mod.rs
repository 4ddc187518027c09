//! Range-azimuth imaging, CA-CFAR, Capon elevation and point clouds.

mod capon;
mod cfar;
mod cloud;
mod ramap;

pub use capon::{capon_elevation, capon_spectrum};
pub use cfar::{cfar_2d, cfar_2d_naive};
pub use cloud::{
    accumulate_pointclouds, frame_pointcloud, read_pointcloud_csv, spherical_to_cartesian,
    write_pointcloud_csv, CloudPoint, Detection, FrameProcessor, PointCloud,
};
pub use ramap::{range_azimuth_map, AngleGrid, RangeAzimuthMap, RangeCube};
