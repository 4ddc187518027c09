use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::capon::{capon_elevation_with, loaded_inverse};
use super::cfar::cfar_2d;
use super::ramap::{range_azimuth_map, AngleGrid, RangeAzimuthMap, RangeCube};
use crate::dsp::{RangeFft, Window};
use crate::error::{Error, Result};
use crate::sim::{ArrayGeometry, FrameRef, RadarConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range_bin: usize,
    /// degrees
    pub azimuth: f64,
    /// degrees
    pub elevation: f64,
    pub power: f64,
}

/// One point, tagged with its source frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub frame_index: usize,
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// (range, azimuth, elevation) → world (x, y, z) with the radar at height `h`.
pub fn spherical_to_cartesian(range: f64, azimuth: f64, elevation: f64, h: f64) -> [f64; 3] {
    [
        range * azimuth.sin() * elevation.cos(),
        range * azimuth.cos() * elevation.cos(),
        h + range * elevation.sin(),
    ]
}

/// Map → CFAR → Capon → Cartesian for successive frames, reusing the FFT
/// plan and angle grids.
#[derive(Debug, Clone)]
pub struct FrameProcessor {
    pub geometry: ArrayGeometry,
    pub azimuth: AngleGrid,
    pub elevation: AngleGrid,
    pub guard: (usize, usize),
    pub training: (usize, usize),
    pub threshold_db: f64,
    /// Keep only CFAR cells that are local maxima of the map (3×3).
    pub peak_grouping: bool,
    pub range_resolution: f64,
    pub radar_height: f64,
    plan: RangeFft,
}

impl FrameProcessor {
    pub fn new(config: &RadarConfig, geometry: &ArrayGeometry, radar_height: f64) -> Self {
        Self {
            geometry: geometry.clone(),
            azimuth: AngleGrid::default(),
            elevation: AngleGrid::default(),
            guard: config.cfar_guard,
            training: config.cfar_training,
            threshold_db: config.cfar_threshold_db,
            peak_grouping: true,
            range_resolution: config.range_resolution(),
            radar_height,
            plan: RangeFft::new(config.adc_samples_per_chirp, Window::Rect),
        }
    }

    pub fn with_grids(mut self, azimuth: AngleGrid, elevation: AngleGrid) -> Self {
        self.azimuth = azimuth;
        self.elevation = elevation;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.plan = RangeFft::new(self.plan.len(), window);
        self
    }

    pub fn range_cube(&self, frame: FrameRef<'_>) -> RangeCube {
        RangeCube::from_frame(frame, &self.plan)
    }

    pub fn map(&self, cube: &RangeCube) -> Result<RangeAzimuthMap> {
        range_azimuth_map(cube, &self.geometry, &self.azimuth)
    }

    pub fn detect(&self, cube: &RangeCube) -> Result<Vec<Detection>> {
        let map = self.map(cube)?;
        let mut cells = cfar_2d(&map, self.guard, self.training, self.threshold_db)?;
        if self.peak_grouping {
            cells.retain(|&(i, j)| is_local_max(&map, i, j));
        }
        let mut inverses = HashMap::new();
        let mut out = Vec::with_capacity(cells.len());
        for (bin, a) in cells {
            // bin 0 is the radar itself
            if bin == 0 {
                continue;
            }
            let r_inv = match inverses.entry(bin) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(loaded_inverse(&cube.covariance(bin))?)
                }
            };
            let azimuth = map.azimuth.degrees[a];
            out.push(Detection {
                range_bin: bin,
                azimuth,
                elevation: capon_elevation_with(r_inv, &self.geometry, azimuth, &self.elevation),
                power: map.get(bin, a),
            });
        }
        Ok(out)
    }

    pub fn to_cloud(&self, detections: &[Detection], frame_index: usize) -> PointCloud {
        let points = detections
            .iter()
            .map(|d| {
                let [x, y, z] = spherical_to_cartesian(
                    d.range_bin as f64 * self.range_resolution,
                    d.azimuth.to_radians(),
                    d.elevation.to_radians(),
                    self.radar_height,
                );
                CloudPoint {
                    frame: frame_index,
                    x,
                    y,
                    z,
                    power: d.power,
                }
            })
            .collect();
        PointCloud {
            frame_index,
            points,
        }
    }

    pub fn process(&self, frame: FrameRef<'_>, frame_index: usize) -> Result<PointCloud> {
        if frame.channels != self.geometry.len() {
            return Err(Error::Argument(format!(
                "frame has {} channels, geometry {} elements",
                frame.channels,
                self.geometry.len()
            )));
        }
        let cube = self.range_cube(frame);
        Ok(self.to_cloud(&self.detect(&cube)?, frame_index))
    }
}

fn is_local_max(map: &RangeAzimuthMap, i: usize, j: usize) -> bool {
    let p = map.get(i, j);
    let (h, w) = (map.n_range as i64, map.n_azimuth() as i64);
    for di in -1..=1i64 {
        for dj in -1..=1i64 {
            let (r, c) = (i as i64 + di, j as i64 + dj);
            if (di, dj) == (0, 0) || r < 0 || c < 0 || r >= h || c >= w {
                continue;
            }
            let q = map.get(r as usize, c as usize);
            // plateau ties resolve to the first cell in scan order
            if q > p || (q == p && (di, dj) < (0, 0)) {
                return false;
            }
        }
    }
    true
}

pub fn frame_pointcloud(
    config: &RadarConfig,
    geometry: &ArrayGeometry,
    radar_height: f64,
    frame: FrameRef<'_>,
    frame_index: usize,
) -> Result<PointCloud> {
    FrameProcessor::new(config, geometry, radar_height).process(frame, frame_index)
}

/// Concatenates clouds; points keep their source frame tags.
pub fn accumulate_pointclouds(clouds: &[PointCloud]) -> PointCloud {
    PointCloud {
        frame_index: clouds.first().map_or(0, |c| c.frame_index),
        points: clouds.iter().flat_map(|c| c.points.iter().copied()).collect(),
    }
}

/// CSV with header `frame,x,y,z,power`.
pub fn write_pointcloud_csv<W: Write>(w: W, points: &[CloudPoint]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in points {
        wr.serialize(p)?;
    }
    if points.is_empty() {
        wr.write_record(["frame", "x", "y", "z", "power"])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_pointcloud_csv<R: Read>(r: R) -> Result<Vec<CloudPoint>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
