use serde::{Deserialize, Serialize};

use crate::detect::CloudPoint;
use crate::error::{Error, Result};

pub const GRID: usize = 32;
pub const PLANES: usize = 2;

/// Axis-aligned box the projections cover, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            x: [-1.2, 1.2],
            y: [0.8, 3.2],
            z: [-0.2, 2.6],
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("x", self.x), ("y", self.y), ("z", self.z)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!("voxel bounds {name} = [{lo}, {hi}] are empty")));
            }
        }
        Ok(())
    }
}

/// Two stacked `side × side` planes: depth–azimuth (rows y, columns x) and
/// depth–elevation (rows y, columns z), each max-normalized to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    pub side: usize,
    pub data: Vec<f64>,
}

impl InputTensor {
    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            data: vec![0.0; PLANES * side * side],
        }
    }

    pub fn plane(&self, p: usize) -> &[f64] {
        let n = self.side * self.side;
        &self.data[p * n..(p + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

fn cell(v: f64, [lo, hi]: [f64; 2], side: usize) -> Option<usize> {
    if !(v >= lo && v < hi) {
        return None;
    }
    Some((((v - lo) / (hi - lo)) * side as f64).floor().min(side as f64 - 1.0) as usize)
}

/// Power-weighted histograms of the cloud on both planes. Points outside
/// `bounds` are ignored; an empty cloud gives the zero tensor.
pub fn voxelize_projections(points: &[CloudPoint], bounds: &Bounds, side: usize) -> InputTensor {
    let mut t = InputTensor::zeros(side);
    let n = side * side;
    for p in points {
        let (Some(r), Some(cx), Some(cz)) = (
            cell(p.y, bounds.y, side),
            cell(p.x, bounds.x, side),
            cell(p.z, bounds.z, side),
        ) else {
            continue;
        };
        let w = p.power.max(0.0);
        t.data[r * side + cx] += w;
        t.data[n + r * side + cz] += w;
    }
    for plane in t.data.chunks_mut(n) {
        let m = plane.iter().copied().fold(0.0, f64::max);
        if m > 0.0 {
            plane.iter_mut().for_each(|v| *v /= m);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, z: f64, power: f64) -> CloudPoint {
        CloudPoint { frame: 0, x, y, z, power }
    }

    #[test]
    fn empty_is_zero() {
        let t = voxelize_projections(&[], &Bounds::default(), GRID);
        assert_eq!(t.data.len(), 2 * 32 * 32);
        assert!(t.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_point_one_cell_per_plane() {
        let t = voxelize_projections(&[pt(0.1, 2.0, 1.2, 7.0)], &Bounds::default(), GRID);
        for p in 0..2 {
            let nz: Vec<f64> = t.plane(p).iter().copied().filter(|&v| v != 0.0).collect();
            assert_eq!(nz, vec![1.0]);
        }
    }

    #[test]
    fn accumulated_cloud_max_is_one() {
        let pts: Vec<CloudPoint> = (0..200)
            .map(|k| pt(-0.5 + 0.005 * k as f64, 1.8 + 0.002 * k as f64, 0.3 + 0.007 * k as f64, 1.0 + k as f64))
            .collect();
        let t = voxelize_projections(&pts, &Bounds::default(), GRID);
        assert_eq!(t.max(), 1.0);
        assert!(t.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn shifting_points_shifts_cells() {
        let b = Bounds::default();
        let step = (b.x[1] - b.x[0]) / GRID as f64;
        let a = voxelize_projections(&[pt(0.0 + step / 2.0, 2.0, 1.0, 1.0)], &b, GRID);
        let s = voxelize_projections(&[pt(3.0 * step + step / 2.0, 2.0, 1.0, 1.0)], &b, GRID);
        let ia = a.plane(0).iter().position(|&v| v > 0.0).unwrap();
        let is = s.plane(0).iter().position(|&v| v > 0.0).unwrap();
        assert_eq!(is, ia + 3);
        assert_eq!(a.plane(1), s.plane(1));
    }

    #[test]
    fn out_of_bounds_dropped() {
        let t = voxelize_projections(&[pt(5.0, 2.0, 1.0, 1.0)], &Bounds::default(), GRID);
        assert_eq!(t.max(), 0.0);
    }
}
