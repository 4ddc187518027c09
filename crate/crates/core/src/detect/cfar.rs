use super::ramap::RangeAzimuthMap;
use crate::error::{Error, Result};

fn check_size(map: &RangeAzimuthMap, guard: (usize, usize), training: (usize, usize)) -> Result<()> {
    let need = (
        2 * (guard.0 + training.0) + 1,
        2 * (guard.1 + training.1) + 1,
    );
    if map.n_range < need.0 || map.n_azimuth() < need.1 {
        return Err(Error::Argument(format!(
            "{}×{} map is smaller than the {}×{} CFAR window",
            map.n_range,
            map.n_azimuth(),
            need.0,
            need.1
        )));
    }
    Ok(())
}

/// Summed-area table with a zero border: `s[(i+1)(w+1) + j+1] = Σ p[..=i][..=j]`.
struct Integral {
    sums: Vec<f64>,
    w: usize,
}

impl Integral {
    fn new(map: &RangeAzimuthMap) -> Self {
        let (h, w) = (map.n_range, map.n_azimuth());
        let mut sums = vec![0.0; (h + 1) * (w + 1)];
        for i in 0..h {
            let mut row = 0.0;
            for j in 0..w {
                row += map.get(i, j);
                sums[(i + 1) * (w + 1) + j + 1] = sums[i * (w + 1) + j + 1] + row;
            }
        }
        Self { sums, w }
    }

    /// Sum over rows `r0..r1`, columns `c0..c1` (half-open).
    fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        let s = |r: usize, c: usize| self.sums[r * (self.w + 1) + c];
        s(r1, c1) - s(r0, c1) - s(r1, c0) + s(r0, c0)
    }
}

fn clipped(center: usize, half: usize, len: usize) -> (usize, usize) {
    (center.saturating_sub(half), (center + half + 1).min(len))
}

/// 2D cell-averaging CFAR on a range-azimuth map.
///
/// The training ring lies outside the guard ring; near edges both windows
/// are truncated and the noise estimate is the mean over the training cells
/// that exist. Cells with zero power are never detections.
pub fn cfar_2d(
    map: &RangeAzimuthMap,
    guard: (usize, usize),
    training: (usize, usize),
    threshold_db: f64,
) -> Result<Vec<(usize, usize)>> {
    check_size(map, guard, training)?;
    let (h, w) = (map.n_range, map.n_azimuth());
    let scale = 10f64.powf(threshold_db / 10.0);
    let table = Integral::new(map);
    let mut hits = Vec::new();
    for i in 0..h {
        let (ro0, ro1) = clipped(i, guard.0 + training.0, h);
        let (ri0, ri1) = clipped(i, guard.0, h);
        for j in 0..w {
            let (co0, co1) = clipped(j, guard.1 + training.1, w);
            let (ci0, ci1) = clipped(j, guard.1, w);
            let count = (ro1 - ro0) * (co1 - co0) - (ri1 - ri0) * (ci1 - ci0);
            if count == 0 {
                continue;
            }
            let sum = table.rect(ro0, ro1, co0, co1) - table.rect(ri0, ri1, ci0, ci1);
            let noise = sum.max(0.0) / count as f64;
            let p = map.get(i, j);
            if p > 0.0 && p >= noise * scale {
                hits.push((i, j));
            }
        }
    }
    Ok(hits)
}

/// Direct double loop over every training cell; reference for [`cfar_2d`].
pub fn cfar_2d_naive(
    map: &RangeAzimuthMap,
    guard: (usize, usize),
    training: (usize, usize),
    threshold_db: f64,
) -> Result<Vec<(usize, usize)>> {
    check_size(map, guard, training)?;
    let (h, w) = (map.n_range as i64, map.n_azimuth() as i64);
    let (gr, gc) = (guard.0 as i64, guard.1 as i64);
    let (tr, tc) = ((guard.0 + training.0) as i64, (guard.1 + training.1) as i64);
    let scale = 10f64.powf(threshold_db / 10.0);
    let mut hits = Vec::new();
    for i in 0..h {
        for j in 0..w {
            let (mut sum, mut count) = (0.0, 0usize);
            for di in -tr..=tr {
                for dj in -tc..=tc {
                    if di.abs() <= gr && dj.abs() <= gc {
                        continue;
                    }
                    let (r, c) = (i + di, j + dj);
                    if r < 0 || c < 0 || r >= h || c >= w {
                        continue;
                    }
                    sum += map.get(r as usize, c as usize);
                    count += 1;
                }
            }
            let p = map.get(i as usize, j as usize);
            if count > 0 && p > 0.0 && p >= sum / count as f64 * scale {
                hits.push((i as usize, j as usize));
            }
        }
    }
    Ok(hits)
}
