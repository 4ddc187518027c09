//! Direct least-squares conic fitting and a split-and-refit ellipse cover
//! of 2D silhouettes.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartLabel {
    Head,
    Torso,
    Pelvis,
    LeftUpperArm,
    RightUpperArm,
    LeftForearm,
    RightForearm,
    LeftLeg,
    RightLeg,
}

/// Ellipse in the (x, z) body plane. `semi_axes = (a, b)` with `a >= b`;
/// `rotation` is the major-axis angle from +x, in `[-π/2, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub rotation: f64,
    pub label: Option<PartLabel>,
}

fn wrap_half_turn(mut r: f64) -> f64 {
    while r >= FRAC_PI_2 {
        r -= PI;
    }
    while r < -FRAC_PI_2 {
        r += PI;
    }
    r
}

impl Ellipse {
    /// Builds an ellipse, swapping axes so that `a >= b`.
    pub fn new(center: [f64; 2], a: f64, b: f64, rotation: f64) -> Self {
        let (a, b, rotation) = if a >= b {
            (a, b, rotation)
        } else {
            (b, a, rotation + FRAC_PI_2)
        };
        Self {
            center,
            semi_axes: [a, b],
            rotation: wrap_half_turn(rotation),
            label: None,
        }
    }

    /// Limb ellipse whose major axis runs from `p` to `q`.
    pub fn from_segment(p: [f64; 2], q: [f64; 2], half_width: f64) -> Self {
        let (dx, dz) = (q[0] - p[0], q[1] - p[1]);
        let half_len = 0.5 * (dx * dx + dz * dz).sqrt();
        Self::new(
            [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0],
            half_len,
            half_width,
            dz.atan2(dx),
        )
    }

    pub fn labeled(mut self, label: PartLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_axes[0] * self.semi_axes[1]
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        let (x, z) = (self.semi_axes[0] * t.cos(), self.semi_axes[1] * t.sin());
        [self.center[0] + c * x - s * z, self.center[1] + s * x + c * z]
    }

    /// Major-axis endpoints, the first one at parameter 0.
    pub fn major_endpoints(&self) -> [[f64; 2]; 2] {
        [self.point_at(0.0), self.point_at(PI)]
    }

    /// Ramanujan's perimeter approximation.
    pub fn perimeter(&self) -> f64 {
        let [a, b] = self.semi_axes;
        PI * (3.0 * (a + b) - ((3.0 * a + b) * (a + 3.0 * b)).sqrt())
    }

    /// Euclidean distance from `p` to the ellipse outline.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dz) = (p[0] - self.center[0], p[1] - self.center[1]);
        let y0 = (c * dx + s * dz).abs();
        let y1 = (-s * dx + c * dz).abs();
        distance_canonical(self.semi_axes[0], self.semi_axes[1], y0, y1)
    }
}

/// Distance from (y0, y1) in the first quadrant to x²/e0² + y²/e1² = 1,
/// e0 >= e1 (Eberly's bisection).
fn distance_canonical(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1) * (e0 / e1);
                let sbar = root_bisect(r0, z0, z1, g);
                let x0 = r0 * y0 / (sbar + r0);
                let x1 = y1 / (sbar + 1.0);
                ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
            } else {
                0.0
            }
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn root_bisect(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// General conic A x² + B xz + C z² + D x + E z + F = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conic(pub [f64; 6]);

impl Conic {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let [a, b, c, d, e, f] = self.0;
        let (x, z) = (p[0], p[1]);
        a * x * x + b * x * z + c * z * z + d * x + e * z + f
    }

    pub fn to_ellipse(&self) -> Result<Ellipse> {
        let [a, b, c, d, e, f] = self.0;
        let disc = 4.0 * a * c - b * b;
        if !(disc > 0.0) {
            return Err(Error::Fit {
                reason: "conic is not an ellipse".into(),
                residual: disc,
            });
        }
        let xc = (b * e - 2.0 * c * d) / disc;
        let zc = (b * d - 2.0 * a * e) / disc;
        let f0 = a * xc * xc + b * xc * zc + c * zc * zc + d * xc + e * zc + f;
        let theta = 0.5 * b.atan2(a - c);
        let (s, co) = theta.sin_cos();
        let l1 = a * co * co + b * co * s + c * s * s;
        let l2 = a * s * s - b * co * s + c * co * co;
        let q1 = -f0 / l1;
        let q2 = -f0 / l2;
        if !(q1 > 0.0 && q2 > 0.0) {
            return Err(Error::Fit {
                reason: "imaginary ellipse".into(),
                residual: f0,
            });
        }
        Ok(Ellipse::new([xc, zc], q1.sqrt(), q2.sqrt(), theta))
    }
}

/// Direct least-squares ellipse-specific conic fit (numerically stable
/// block form with coordinate normalization).
pub fn fit_conic(points: &[[f64; 2]]) -> Result<Conic> {
    if points.len() < 6 {
        return Err(Error::Fit {
            reason: format!("need at least 6 points, got {}", points.len()),
            residual: f64::INFINITY,
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let mz = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let scale = (points
        .iter()
        .map(|p| (p[0] - mx).powi(2) + (p[1] - mz).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if !(scale > 0.0) {
        return Err(Error::Fit {
            reason: "points are coincident".into(),
            residual: 0.0,
        });
    }
    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for p in points {
        let u = (p[0] - mx) / scale;
        let v = (p[1] - mz) / scale;
        let d1 = Vector3::new(u * u, u * v, v * v);
        let d2 = Vector3::new(u, v, 1.0);
        s1 += d1 * d1.transpose();
        s2 += d1 * d2.transpose();
        s3 += d2 * d2.transpose();
    }
    let s3_inv = s3.try_inverse().ok_or_else(|| Error::Fit {
        reason: "degenerate point set (collinear)".into(),
        residual: 0.0,
    })?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // premultiply by the inverse of the ellipse constraint block
    let m = Matrix3::new(
        m[(2, 0)] / 2.0,
        m[(2, 1)] / 2.0,
        m[(2, 2)] / 2.0,
        -m[(1, 0)],
        -m[(1, 1)],
        -m[(1, 2)],
        m[(0, 0)] / 2.0,
        m[(0, 1)] / 2.0,
        m[(0, 2)] / 2.0,
    );
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for lambda in m.complex_eigenvalues().iter() {
        if lambda.im.abs() > 1e-9 * (1.0 + lambda.re.abs()) {
            continue;
        }
        let Some(v) = null_vector(&(m - Matrix3::identity() * lambda.re)) else {
            continue;
        };
        let cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if cond > 0.0 {
            let score = lambda.re.abs();
            if best.as_ref().map_or(true, |(s, _)| score < *s) {
                best = Some((score, v));
            }
        }
    }
    let (_, a1) = best.ok_or_else(|| Error::Fit {
        reason: "no ellipse-constrained eigenvector".into(),
        residual: f64::INFINITY,
    })?;
    let a2 = t * a1;
    // back to original coordinates: u = (x - mx)/s, v = (z - mz)/s
    let (a, b, c, d, e, f) = (a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]);
    let s = scale;
    let ss = s * s;
    let big_a = a / ss;
    let big_b = b / ss;
    let big_c = c / ss;
    let big_d = -2.0 * a * mx / ss - b * mz / ss + d / s;
    let big_e = -2.0 * c * mz / ss - b * mx / ss + e / s;
    let big_f = a * mx * mx / ss + b * mx * mz / ss + c * mz * mz / ss - d * mx / s - e * mz / s + f;
    Ok(Conic([big_a, big_b, big_c, big_d, big_e, big_f]))
}

fn null_vector(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let rows = [
        Vector3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]),
        Vector3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]),
        Vector3::new(m[(2, 0)], m[(2, 1)], m[(2, 2)]),
    ];
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()?;
    let n = best.norm();
    (n > 0.0).then(|| best / n)
}

pub fn fit_ellipse(points: &[[f64; 2]]) -> Result<Ellipse> {
    fit_conic(points)?.to_ellipse()
}

/// Result of covering a point set with ellipses.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseCover {
    pub ellipses: Vec<Ellipse>,
    /// Per-point distance to the closest ellipse: RMS and maximum.
    pub rms_residual: f64,
    pub max_residual: f64,
}

const MIN_CLUSTER: usize = 6;
const CONSENSUS_TRIALS: usize = 250;
const CONSENSUS_RADIUS: f64 = 0.25;
const CONSENSUS_SEED: u64 = 0x5eed_e11;

/// First-order (Sampson) distance to a conic; cheap stand-in for the
/// geometric distance when counting support.
fn sampson_distance(c: &Conic, p: [f64; 2]) -> f64 {
    let [a, b, cc, d, e, _] = c.0;
    let gx = 2.0 * a * p[0] + b * p[1] + d;
    let gz = b * p[0] + 2.0 * cc * p[1] + e;
    let g = (gx * gx + gz * gz).sqrt();
    if g > 0.0 {
        c.eval(p).abs() / g
    } else {
        f64::INFINITY
    }
}

/// Splits `members` into the support of the best locally sampled ellipse
/// and the residual points.
fn consensus_split<R: Rng>(
    points: &[[f64; 2]],
    members: &[usize],
    inlier_tol: f64,
    rng: &mut R,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut best: Option<(usize, Conic)> = None;
    let mut sample = Vec::with_capacity(MIN_CLUSTER);
    for _ in 0..CONSENSUS_TRIALS {
        let seed = points[members[rng.gen_range(0..members.len())]];
        let local: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| dist2(points[i], seed) < CONSENSUS_RADIUS * CONSENSUS_RADIUS)
            .collect();
        if local.len() < MIN_CLUSTER {
            continue;
        }
        sample.clear();
        sample.extend(
            rand::seq::index::sample(rng, local.len(), MIN_CLUSTER)
                .into_iter()
                .map(|k| points[local[k]]),
        );
        let Ok(conic) = fit_conic(&sample) else {
            continue;
        };
        if conic.to_ellipse().is_err() {
            continue;
        }
        let support = members
            .iter()
            .filter(|&&i| sampson_distance(&conic, points[i]) <= inlier_tol)
            .count();
        if best.as_ref().map_or(true, |(n, _)| support > *n) {
            best = Some((support, conic));
        }
    }
    let (_, conic) = best?;
    // refit on the support once, then take the final support
    let support: Vec<[f64; 2]> = members
        .iter()
        .filter(|&&i| sampson_distance(&conic, points[i]) <= inlier_tol)
        .map(|&i| points[i])
        .collect();
    let conic = fit_conic(&support).ok().filter(|c| c.to_ellipse().is_ok()).unwrap_or(conic);
    let (inliers, rest): (Vec<usize>, Vec<usize>) = members
        .iter()
        .partition(|&&i| sampson_distance(&conic, points[i]) <= inlier_tol);
    (inliers.len() >= MIN_CLUSTER && rest.len() >= MIN_CLUSTER).then_some((inliers, rest))
}

/// Two-means split seeded at the extremes of the cluster's principal axis.
fn two_means(points: &[[f64; 2]], members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = members.len() as f64;
    let mx = members.iter().map(|&i| points[i][0]).sum::<f64>() / n;
    let mz = members.iter().map(|&i| points[i][1]).sum::<f64>() / n;
    let (mut sxx, mut sxz, mut szz) = (0.0, 0.0, 0.0);
    for &i in members {
        let (dx, dz) = (points[i][0] - mx, points[i][1] - mz);
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
    }
    let theta = 0.5 * (2.0 * sxz).atan2(sxx - szz);
    let axis = [theta.cos(), theta.sin()];
    let proj = |i: usize| (points[i][0] - mx) * axis[0] + (points[i][1] - mz) * axis[1];
    let lo = *members.iter().min_by(|&&a, &&b| proj(a).total_cmp(&proj(b))).unwrap();
    let hi = *members.iter().max_by(|&&a, &&b| proj(a).total_cmp(&proj(b))).unwrap();
    let mut c = [points[lo], points[hi]];
    let mut side = vec![false; members.len()];
    for _ in 0..50 {
        let mut changed = false;
        for (k, &i) in members.iter().enumerate() {
            let s = dist2(points[i], c[1]) < dist2(points[i], c[0]);
            changed |= s != side[k];
            side[k] = s;
        }
        for (k, want) in [false, true].into_iter().enumerate() {
            let (mut sx, mut sz, mut cnt) = (0.0, 0.0, 0.0);
            for (&i, &s) in members.iter().zip(&side) {
                if s == want {
                    sx += points[i][0];
                    sz += points[i][1];
                    cnt += 1.0;
                }
            }
            if cnt > 0.0 {
                c[k] = [sx / cnt, sz / cnt];
            }
        }
        if !changed {
            break;
        }
    }
    let (b, a): (Vec<(usize, bool)>, Vec<(usize, bool)>) =
        members.iter().copied().zip(side).partition(|(_, s)| *s);
    (
        a.into_iter().map(|(i, _)| i).collect(),
        b.into_iter().map(|(i, _)| i).collect(),
    )
}

/// Distance of every point to its nearest ellipse.
fn nearest_distances(points: &[[f64; 2]], ellipses: &[Ellipse]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            ellipses
                .iter()
                .map(|e| e.distance(*p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Covers a silhouette with up to `max_ellipses` ellipses.
///
/// Starts from one direct least-squares fit of all points. While some point
/// lies farther than `coverage_tol` from its cluster's ellipse, the
/// worst-covered cluster is split and both halves are refit. The cover with
/// the smallest worst point distance along the way is returned, so coverage
/// never worsens with a larger budget. The split
/// separates the support of the best-supported ellipse found by seeded
/// local sampling from the residual points; when no such ellipse exists
/// the cluster is split by two-means. The result is labeled by body layout
/// (see [`label_parts`]).
pub fn fit_ellipses(
    points: &[[f64; 2]],
    max_ellipses: usize,
    coverage_tol: f64,
) -> Result<EllipseCover> {
    if points.len() < MIN_CLUSTER {
        return Err(Error::Argument(format!(
            "ellipse cover needs at least {MIN_CLUSTER} points, got {}",
            points.len()
        )));
    }
    if max_ellipses == 0 {
        return Err(Error::Argument("max_ellipses must be at least 1".into()));
    }
    let inlier_tol = (coverage_tol / 3.0).min(0.005);
    let mut rng = ChaCha8Rng::seed_from_u64(CONSENSUS_SEED);
    let all: Vec<usize> = (0..points.len()).collect();
    let mut clusters = vec![(fit_ellipse(points)?, all)];
    let worst = |e: &Ellipse, m: &[usize]| m.iter().map(|&i| e.distance(points[i])).fold(0.0, f64::max);
    let cover_max = |cl: &[(Ellipse, Vec<usize>)]| {
        let es: Vec<Ellipse> = cl.iter().map(|(e, _)| *e).collect();
        nearest_distances(points, &es).into_iter().fold(0.0, f64::max)
    };
    // the split sequence for a larger budget extends the one for a smaller
    // budget, so returning the best cover seen keeps coverage monotone
    let mut best = (cover_max(&clusters), clusters.clone());
    while clusters.len() < max_ellipses {
        let (k, w) = clusters
            .iter()
            .enumerate()
            .map(|(k, (e, m))| (k, worst(e, m)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if w <= coverage_tol {
            break;
        }
        let members = clusters[k].1.clone();
        let halves = consensus_split(points, &members, inlier_tol, &mut rng)
            .or_else(|| {
                let (a, b) = two_means(points, &members);
                (a.len() >= MIN_CLUSTER && b.len() >= MIN_CLUSTER).then_some((a, b))
            });
        let Some((a, b)) = halves else { break };
        let pa: Vec<[f64; 2]> = a.iter().map(|&i| points[i]).collect();
        let pb: Vec<[f64; 2]> = b.iter().map(|&i| points[i]).collect();
        let (Ok(ea), Ok(eb)) = (fit_ellipse(&pa), fit_ellipse(&pb)) else {
            break;
        };
        clusters[k] = (ea, a);
        clusters.push((eb, b));
        let m = cover_max(&clusters);
        if m <= best.0 {
            best = (m, clusters.clone());
        }
    }
    let clusters = best.1;
    let mut ellipses: Vec<Ellipse> = clusters.into_iter().map(|(e, _)| e).collect();
    let d = nearest_distances(points, &ellipses);
    let rms_residual = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
    let max_residual = d.iter().copied().fold(0.0, f64::max);
    label_parts(&mut ellipses);
    Ok(EllipseCover {
        ellipses,
        rms_residual,
        max_residual,
    })
}

fn sorted_major_ends(e: &Ellipse) -> ([f64; 2], [f64; 2]) {
    let [p, q] = e.major_endpoints();
    if p[1] >= q[1] {
        (p, q)
    } else {
        (q, p)
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Assigns body-part labels from the layout of a standing subject facing
/// the array: largest ellipse is the torso, the head sits on top of it,
/// the pelvis at its lower end, legs below it, and the remaining ellipses
/// are arms split by side and ordered outward from the shoulder.
pub fn label_parts(ellipses: &mut [Ellipse]) {
    for e in ellipses.iter_mut() {
        e.label = None;
    }
    let Some(torso) = (0..ellipses.len()).max_by(|&a, &b| {
        ellipses[a]
            .area()
            .total_cmp(&ellipses[b].area())
            .then(b.cmp(&a))
    }) else {
        return;
    };
    ellipses[torso].label = Some(PartLabel::Torso);
    let t = ellipses[torso];
    let (top, bottom) = sorted_major_ends(&t);
    let half_width = t.semi_axes[1];
    let free = |es: &[Ellipse]| -> Vec<usize> {
        (0..es.len()).filter(|&i| es[i].label.is_none()).collect()
    };

    let head = free(ellipses)
        .into_iter()
        .filter(|&i| {
            let c = ellipses[i].center;
            c[1] > top[1] - 0.05 && (c[0] - t.center[0]).abs() < half_width + 0.05
        })
        .min_by(|&a, &b| {
            dist2(ellipses[a].center, top).total_cmp(&dist2(ellipses[b].center, top))
        });
    if let Some(h) = head {
        ellipses[h].label = Some(PartLabel::Head);
    }

    let pelvis = free(ellipses)
        .into_iter()
        .filter(|&i| {
            let e = &ellipses[i];
            (e.center[1] - bottom[1]).abs() < 0.15
                && (e.center[0] - t.center[0]).abs() < 0.1
                && e.rotation.abs() < std::f64::consts::FRAC_PI_4
        })
        .min_by(|&a, &b| {
            dist2(ellipses[a].center, bottom).total_cmp(&dist2(ellipses[b].center, bottom))
        });
    if let Some(p) = pelvis {
        ellipses[p].label = Some(PartLabel::Pelvis);
    }

    let mut legs: Vec<usize> = free(ellipses)
        .into_iter()
        .filter(|&i| ellipses[i].center[1] < bottom[1])
        .collect();
    legs.sort_by(|&a, &b| ellipses[b].area().total_cmp(&ellipses[a].area()).then(a.cmp(&b)));
    legs.truncate(2);
    legs.sort_by(|&a, &b| ellipses[b].center[0].total_cmp(&ellipses[a].center[0]));
    match legs.as_slice() {
        [one] => {
            ellipses[*one].label = Some(if ellipses[*one].center[0] >= t.center[0] {
                PartLabel::LeftLeg
            } else {
                PartLabel::RightLeg
            })
        }
        [l, r] => {
            ellipses[*l].label = Some(PartLabel::LeftLeg);
            ellipses[*r].label = Some(PartLabel::RightLeg);
        }
        _ => {}
    }

    for (side, upper, fore) in [
        (1.0, PartLabel::LeftUpperArm, PartLabel::LeftForearm),
        (-1.0, PartLabel::RightUpperArm, PartLabel::RightForearm),
    ] {
        let shoulder = [t.center[0] + side * 0.9 * half_width, top[1] - 0.05];
        let near = |e: &Ellipse| {
            let [p, q] = e.major_endpoints();
            dist2(p, shoulder).min(dist2(q, shoulder))
        };
        let mut arm: Vec<usize> = free(ellipses)
            .into_iter()
            .filter(|&i| (ellipses[i].center[0] - t.center[0]) * side > 0.0)
            .collect();
        arm.sort_by(|&a, &b| near(&ellipses[a]).total_cmp(&near(&ellipses[b])).then(a.cmp(&b)));
        if let Some(&u) = arm.first() {
            ellipses[u].label = Some(upper);
        }
        if let Some(&f) = arm.get(1) {
            ellipses[f].label = Some(fore);
        }
    }
}
