//! Synthetic two-view scenes with exact ground truth.
//!
//! Camera 1 sits at the origin looking down +z; camera 2 is translated by
//! `baseline` along a per-seed random direction and rotated by fixed Euler
//! angles. Points are drawn inside the view frustum of camera 1 and kept when
//! they also project inside image 2. Correspondences colinear in both images
//! come from a random 3D segment, since a 3D line projects to a line in each
//! view.

use nalgebra::{Matrix3, Matrix3x4, Rotation3, Vector3, Vector4};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::correspondence::{CorrespondenceSet, ImageSize};
use crate::error::{Error, Result};
use crate::geometry::{skew_unchecked, FundamentalMatrix};

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSceneSpec {
    pub n_points: usize,
    /// Correspondences sampled on one 3D segment (always inliers unless the
    /// outlier count exceeds the off-line points).
    pub n_on_line: usize,
    pub outlier_rate: f64,
    /// Gaussian pixel noise per coordinate, applied to inliers in both images.
    pub noise_sigma: f64,
    pub image_size: (f64, f64),
    pub focal: f64,
    pub baseline: f64,
    /// Yaw, pitch, roll of camera 2 in degrees.
    pub rotation_deg: [f64; 3],
    /// Depth range of the scene points along camera 1's axis.
    pub depth_range: (f64, f64),
    /// Minimum distance in pixels between each epipole and the projected
    /// line.
    pub epipole_clearance: f64,
    pub seed: u64,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        Self {
            n_points: 100,
            n_on_line: 10,
            outlier_rate: 0.0,
            noise_sigma: 0.0,
            image_size: (640.0, 480.0),
            focal: 500.0,
            baseline: 1.0,
            rotation_deg: [4.0, 2.0, 3.0],
            depth_range: (4.0, 10.0),
            epipole_clearance: 20.0,
            seed: 0,
        }
    }
}

/// Exact ground truth of a generated scene. Masks are indexed by
/// correspondence id.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub f_gt: FundamentalMatrix,
    pub inlier_mask: Vec<bool>,
    pub line3d_member_mask: Vec<bool>,
    /// Projections of the other camera's center, unit norm.
    pub epipole1: Vector3<f64>,
    pub epipole2: Vector3<f64>,
}

struct Cameras {
    k: Matrix3<f64>,
    rot: Matrix3<f64>,
    center2: Vector3<f64>,
    p1: Matrix3x4<f64>,
    p2: Matrix3x4<f64>,
}

impl Cameras {
    fn project(p: &Matrix3x4<f64>, x: &Vector3<f64>) -> Option<(f64, f64)> {
        let h = p * Vector4::new(x.x, x.y, x.z, 1.0);
        (h.z > 1e-9).then(|| (h.x / h.z, h.y / h.z))
    }

    /// `F = K^-T [t]x R K^-1` with `t = -R c2`, which equals
    /// `[e2]x P2 P1^+` up to scale and is exactly rank 2 by construction.
    fn f_gt(&self) -> Result<(FundamentalMatrix, Vector3<f64>, Vector3<f64>)> {
        let k_inv = self
            .k
            .try_inverse()
            .ok_or_else(|| Error::GenerationFailure("calibration is singular".into()))?;
        let t = -self.rot * self.center2;
        let f = FundamentalMatrix::new(k_inv.transpose() * skew_unchecked(&t) * self.rot * k_inv)?;
        let e2 = self.p2 * Vector4::new(0.0, 0.0, 0.0, 1.0);
        let c2 = self.center2;
        let e1 = self.p1 * Vector4::new(c2.x, c2.y, c2.z, 1.0);
        Ok((f, e1.normalize(), e2.normalize()))
    }
}

fn cameras(spec: &SyntheticSceneSpec, rng: &mut ChaCha8Rng) -> Cameras {
    let (w, h) = spec.image_size;
    let k = Matrix3::new(spec.focal, 0.0, w / 2.0, 0.0, spec.focal, h / 2.0, 0.0, 0.0, 1.0);
    let [yaw, pitch, roll] = spec.rotation_deg.map(f64::to_radians);
    let rot = *Rotation3::from_euler_angles(roll, pitch, yaw).matrix();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let dir = Vector3::new(sign, rng.random_range(-0.3..=0.3), rng.random_range(-0.3..=0.3)).normalize();
    let center2 = dir * spec.baseline;
    let mut p1 = Matrix3x4::zeros();
    p1.fixed_view_mut::<3, 3>(0, 0).copy_from(&k);
    let mut ext = Matrix3x4::zeros();
    ext.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
    ext.set_column(3, &(-rot * center2));
    let p2 = k * ext;
    Cameras { k, rot, center2, p1, p2 }
}

fn inside(size: ImageSize, p: (f64, f64)) -> bool {
    p.0 >= 0.0 && p.0 <= size.width && p.1 >= 0.0 && p.1 <= size.height
}

/// A 3D point visible in both images.
fn visible_point(spec: &SyntheticSceneSpec, cams: &Cameras, rng: &mut ChaCha8Rng) -> Result<Vector3<f64>> {
    let size = ImageSize::new(spec.image_size.0, spec.image_size.1);
    let k_inv = cams.k.try_inverse().expect("calibration is invertible");
    for _ in 0..MAX_ATTEMPTS {
        let u = rng.random_range(0.0..=size.width);
        let v = rng.random_range(0.0..=size.height);
        let z = rng.random_range(spec.depth_range.0..=spec.depth_range.1);
        let ray = k_inv * Vector3::new(u, v, 1.0);
        let x = ray * (z / ray.z);
        if Cameras::project(&cams.p2, &x).is_some_and(|p| inside(size, p)) {
            return Ok(x);
        }
    }
    Err(Error::GenerationFailure("no point visible in both images".into()))
}

fn line_distance(e: &Vector3<f64>, a: (f64, f64), b: (f64, f64)) -> f64 {
    let l = Vector3::new(a.0, a.1, 1.0).cross(&Vector3::new(b.0, b.1, 1.0));
    let n = l.x.hypot(l.y);
    if e.z.abs() <= 1e-12 * e.norm() {
        // Ideal epipole: an infinite distance unless the line runs parallel
        // to its direction.
        return if (l.dot(e) / (n * e.norm())).abs() <= 1e-9 { 0.0 } else { f64::INFINITY };
    }
    (l.dot(e) / e.z).abs() / n
}

/// Generates the correspondence set and its ground truth. Identical specs
/// produce identical output.
pub fn generate_scene(spec: &SyntheticSceneSpec) -> Result<(CorrespondenceSet, GroundTruth)> {
    if spec.n_on_line > spec.n_points {
        return Err(Error::InvalidArgument("n_on_line exceeds n_points".into()));
    }
    if !(0.0..1.0).contains(&spec.outlier_rate) {
        return Err(Error::InvalidArgument("outlier_rate must lie in [0, 1)".into()));
    }
    if !(spec.noise_sigma >= 0.0) || !(spec.focal > 0.0) || !(spec.baseline > 0.0) {
        return Err(Error::InvalidArgument("noise, focal length and baseline must be valid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let size = ImageSize::new(spec.image_size.0, spec.image_size.1);
    let cams = cameras(spec, &mut rng);
    let (f_gt, e1, e2) = cams.f_gt()?;

    let mut clean: Vec<((f64, f64), (f64, f64))> = Vec::with_capacity(spec.n_points);
    if spec.n_on_line > 0 {
        let min_len = 0.4 * size.width.min(size.height);
        let mut accepted = None;
        for _ in 0..MAX_ATTEMPTS {
            let a = visible_point(spec, &cams, &mut rng)?;
            let b = visible_point(spec, &cams, &mut rng)?;
            let (Some(a1), Some(b1), Some(a2), Some(b2)) = (
                Cameras::project(&cams.p1, &a),
                Cameras::project(&cams.p1, &b),
                Cameras::project(&cams.p2, &a),
                Cameras::project(&cams.p2, &b),
            ) else {
                continue;
            };
            let long = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).hypot(p.1 - q.1) >= min_len;
            if !long(a1, b1) || !long(a2, b2) {
                continue;
            }
            if line_distance(&e1, a1, b1) < spec.epipole_clearance || line_distance(&e2, a2, b2) < spec.epipole_clearance {
                continue;
            }
            accepted = Some((a, b));
            break;
        }
        let (a, b) = accepted.ok_or_else(|| Error::GenerationFailure("no admissible 3D segment".into()))?;
        for i in 0..spec.n_on_line {
            let t = (i as f64 + rng.random::<f64>()) / spec.n_on_line as f64;
            let x = a + (b - a) * t;
            let p1 = Cameras::project(&cams.p1, &x).expect("segment is in front of camera 1");
            let p2 = Cameras::project(&cams.p2, &x).expect("segment is in front of camera 2");
            clean.push((p1, p2));
        }
    }
    while clean.len() < spec.n_points {
        let x = visible_point(spec, &cams, &mut rng)?;
        let p1 = Cameras::project(&cams.p1, &x).expect("visible");
        let p2 = Cameras::project(&cams.p2, &x).expect("visible");
        clean.push((p1, p2));
    }

    let n = spec.n_points;
    let line_mask: Vec<bool> = (0..n).map(|i| i < spec.n_on_line).collect();
    let n_out = (spec.outlier_rate * n as f64).round() as usize;
    let mut off_line: Vec<usize> = (spec.n_on_line..n).collect();
    off_line.shuffle(&mut rng);
    let mut on_line: Vec<usize> = (0..spec.n_on_line).collect();
    on_line.shuffle(&mut rng);
    let mut outlier = vec![false; n];
    for &i in off_line.iter().chain(&on_line).take(n_out) {
        outlier[i] = true;
    }

    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let jitter = |v: f64, hi: f64, rng: &mut ChaCha8Rng| {
        if spec.noise_sigma == 0.0 {
            v
        } else {
            (v + noise.sample(rng)).clamp(0.0, hi)
        }
    };
    let mut pairs = Vec::with_capacity(n);
    for (i, &(p1, p2)) in clean.iter().enumerate() {
        if outlier[i] {
            let x = (rng.random_range(0.0..=size.width), rng.random_range(0.0..=size.height));
            let xp = (rng.random_range(0.0..=size.width), rng.random_range(0.0..=size.height));
            pairs.push((x, xp));
        } else {
            let x = (jitter(p1.0, size.width, &mut rng), jitter(p1.1, size.height, &mut rng));
            let xp = (jitter(p2.0, size.width, &mut rng), jitter(p2.1, size.height, &mut rng));
            pairs.push((x, xp));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let set = CorrespondenceSet::new(order.iter().map(|&i| pairs[i]), size, size)?;
    let gt = GroundTruth {
        f_gt,
        inlier_mask: order.iter().map(|&i| !outlier[i]).collect(),
        line3d_member_mask: order.iter().map(|&i| line_mask[i]).collect(),
        epipole1: e1,
        epipole2: e2,
    };
    Ok((set, gt))
}
