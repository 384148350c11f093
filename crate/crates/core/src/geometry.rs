//! Projective 2D primitives and fundamental-matrix utilities.
//!
//! Points and lines are homogeneous 3-vectors. Distances are always reported
//! in pixels of the image the entity lives in, so points at infinity are
//! rejected wherever a Euclidean distance is required.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Error, Result};
use crate::linalg::svd3;

/// Relative tolerance under which a singular value is treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Relative tolerance used by point normalization checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Homogeneous third coordinates smaller than this (relative to the vector
/// norm) mark a point at infinity.
const INFINITY_TOLERANCE: f64 = 1e-12;

/// A point of the projective plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint(Vector3<f64>);

impl HomogeneousPoint {
    pub fn new(coords: Vector3<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point has non-finite coordinates"));
        }
        if coords.norm() == 0.0 {
            return Err(invalid("zero vector is not a projective point"));
        }
        Ok(Self(coords))
    }

    /// The finite point `(x, y, 1)`.
    pub fn from_pixel(x: f64, y: f64) -> Self {
        Self(Vector3::new(x, y, 1.0))
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.z.abs() > INFINITY_TOLERANCE * self.0.norm()
    }

    /// Pixel coordinates, or `None` for a point at infinity.
    pub fn to_pixel(&self) -> Option<(f64, f64)> {
        self.is_finite().then(|| (self.0.x / self.0.z, self.0.y / self.0.z))
    }

    pub(crate) fn pixel(&self) -> Result<(f64, f64)> {
        self.to_pixel()
            .ok_or_else(|| invalid("point at infinity has no pixel position"))
    }

    /// Projective equality: the two vectors are parallel up to `tol`
    /// (relative cross-product magnitude).
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        let a = self.0.normalize();
        let b = other.0.normalize();
        a.cross(&b).norm() <= tol
    }

    /// Unit norm with the largest-magnitude component positive.
    pub fn canonical(&self) -> Self {
        Self(canonical_sign(self.0.normalize()))
    }
}

/// An image line `a x + b y + c = 0`, optionally tagged with the Hough
/// parameters it was detected with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageLine {
    coeffs: [f64; 3],
    hough: Option<HoughCoords>,
}

/// `(rho, theta)` of a line in pixels and radians, with normal
/// `(cos theta, sin theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughCoords {
    pub rho: f64,
    pub theta: f64,
}

impl ImageLine {
    pub fn new(coeffs: Vector3<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("line has non-finite coefficients"));
        }
        if coeffs.x.hypot(coeffs.y) <= INFINITY_TOLERANCE * coeffs.norm() || coeffs.norm() == 0.0 {
            return Err(invalid("line coefficients (a, b) are both zero"));
        }
        Ok(Self {
            coeffs: coeffs.into(),
            hough: None,
        })
    }

    /// The line `x cos(theta) + y sin(theta) = rho`.
    pub fn from_hough(rho: f64, theta: f64) -> Self {
        Self {
            coeffs: [theta.cos(), theta.sin(), -rho],
            hough: Some(HoughCoords { rho, theta }),
        }
    }

    /// The line through two projectively distinct points.
    pub fn through(p: &HomogeneousPoint, q: &HomogeneousPoint) -> Result<Self> {
        Self::new(p.coords().cross(q.coords()))
    }

    pub fn coeffs(&self) -> Vector3<f64> {
        Vector3::from(self.coeffs)
    }

    pub fn hough(&self) -> Option<HoughCoords> {
        self.hough
    }

    /// Coefficients scaled so that `(a, b)` has unit length.
    pub fn normalized(&self) -> Vector3<f64> {
        let c = self.coeffs();
        c / c.x.hypot(c.y)
    }

    /// Orthogonal projection of a finite pixel position onto the line.
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let n = self.normalized();
        let d = n.x * x + n.y * y + n.z;
        (x - d * n.x, y - d * n.y)
    }
}

/// `[v]_x`, the matrix with `[v]_x w = v x w`.
pub fn skew(v: &Vector3<f64>) -> Result<Matrix3<f64>> {
    if v.norm() == 0.0 {
        return Err(invalid("skew of the zero vector"));
    }
    Ok(skew_unchecked(v))
}

pub(crate) fn skew_unchecked(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Both sides of `v x (u x w) = (v.w) u - (v.u) w`, the expansion behind the
/// control-point coefficients of an intersection point.
pub fn cross_identity_check(
    v: &Vector3<f64>,
    u: &Vector3<f64>,
    w: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let lhs = v.cross(&u.cross(w));
    let rhs = u * v.dot(w) - w * v.dot(u);
    (lhs, rhs)
}

/// Perpendicular distance in pixels from a finite point to a line.
pub fn point_line_distance(p: &HomogeneousPoint, l: &ImageLine) -> Result<f64> {
    let (x, y) = p.pixel()?;
    Ok(pixel_line_distance(x, y, &l.coeffs()))
}

#[inline]
pub(crate) fn pixel_line_distance(x: f64, y: f64, l: &Vector3<f64>) -> f64 {
    (l.x * x + l.y * y + l.z).abs() / l.x.hypot(l.y)
}

/// How the two one-sided epipolar distances are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SedKind {
    /// Mean of the two point-to-epipolar-line distances, in pixels.
    #[default]
    Mean,
    /// Sum of the two squared distances, in squared pixels.
    SquaredSum,
}

/// Distance of a finite point to a line given as raw coefficients; `None`
/// when the line is undefined (zero or line at infinity).
#[inline]
/// Distance to `l`, or `None` when `l` is undefined: its direction part is
/// negligible against `scale`, the size of the product that produced it.
fn one_sided(x: f64, y: f64, l: &Vector3<f64>, scale: f64) -> Option<f64> {
    let n = l.x.hypot(l.y);
    (n > INFINITY_TOLERANCE * scale.max(l.norm()) && n > 0.0).then(|| (l.x * x + l.y * y + l.z).abs() / n)
}

/// Symmetric epipolar distance: `d(x', F x)` and `d(x, F^T x')` combined by
/// the mean. Invariant to rescaling of `F`.
pub fn symmetric_epipolar_distance(
    f: &FundamentalMatrix,
    x: &HomogeneousPoint,
    xp: &HomogeneousPoint,
) -> Result<f64> {
    symmetric_epipolar_distance_with(f, x, xp, SedKind::Mean)
}

pub fn symmetric_epipolar_distance_with(
    f: &FundamentalMatrix,
    x: &HomogeneousPoint,
    xp: &HomogeneousPoint,
    kind: SedKind,
) -> Result<f64> {
    let (x1, y1) = x.pixel()?;
    let (x2, y2) = xp.pixel()?;
    sed_pixels(f.matrix(), (x1, y1), (x2, y2), kind)
        .ok_or_else(|| degenerate("both epipolar lines are undefined"))
}

/// Hot-path variant on raw pixel pairs. `None` when both epipolar lines are
/// undefined.
#[inline]
pub(crate) fn sed_pixels(
    f: &Matrix3<f64>,
    (x1, y1): (f64, f64),
    (x2, y2): (f64, f64),
    kind: SedKind,
) -> Option<f64> {
    let l2 = f * Vector3::new(x1, y1, 1.0);
    let l1 = f.transpose() * Vector3::new(x2, y2, 1.0);
    let fnorm = f.norm();
    let d2 = one_sided(x2, y2, &l2, fnorm * x1.hypot(y1).hypot(1.0));
    let d1 = one_sided(x1, y1, &l1, fnorm * x2.hypot(y2).hypot(1.0));
    match (d1, d2, kind) {
        (Some(a), Some(b), SedKind::Mean) => Some(0.5 * (a + b)),
        (Some(a), Some(b), SedKind::SquaredSum) => Some(a * a + b * b),
        (Some(d), None, SedKind::Mean) | (None, Some(d), SedKind::Mean) => Some(d),
        (Some(d), None, SedKind::SquaredSum) | (None, Some(d), SedKind::SquaredSum) => Some(d * d),
        (None, None, _) => None,
    }
}

/// A rank-2 fundamental matrix in canonical form: unit Frobenius norm with the
/// largest-magnitude entry positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix(Matrix3<f64>);

impl FundamentalMatrix {
    /// Canonicalizes `m` and checks `|det| <= 1e-9 * ||m||^3`. Use
    /// [`enforce_rank2`] to project a full-rank matrix first.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let c = canonical_matrix(&m)?;
        if c.determinant().abs() > 1e-9 {
            return Err(Error::Rank(format!(
                "|det| = {:e} on the unit-norm matrix",
                c.determinant().abs()
            )));
        }
        Ok(Self(c))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// Builds from row-major entries, projecting to rank 2.
    pub fn from_row_major(v: &[f64; 9]) -> Result<Self> {
        enforce_rank2(&Matrix3::from_row_slice(v))
    }

    pub fn transpose(&self) -> Self {
        Self(canonical_matrix(&self.0.transpose()).expect("nonzero"))
    }

    /// Epipolar line `F x` in image 2.
    pub fn epipolar_line_in_second(&self, x: &HomogeneousPoint) -> Vector3<f64> {
        self.0 * x.coords()
    }

    /// Epipolar line `F^T x'` in image 1.
    pub fn epipolar_line_in_first(&self, xp: &HomogeneousPoint) -> Vector3<f64> {
        self.0.transpose() * xp.coords()
    }
}

fn canonical_sign<const N: usize>(
    v: nalgebra::SVector<f64, N>,
) -> nalgebra::SVector<f64, N> {
    let mut best = 0;
    for i in 1..N {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

pub(crate) fn canonical_matrix(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let norm = m.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("matrix is zero or non-finite"));
    }
    let mut c = m / norm;
    // Row-major scan so ties resolve the same way as the serialized order.
    let mut best = (0, 0);
    for r in 0..3 {
        for k in 0..3 {
            if c[(r, k)].abs() > c[best].abs() {
                best = (r, k);
            }
        }
    }
    if c[best] < 0.0 {
        c = -c;
    }
    Ok(c)
}

/// Right and left epipoles: `F e1 = 0`, `F^T e2 = 0`, each unit norm with its
/// largest component positive.
pub fn epipoles(f: &FundamentalMatrix) -> Result<(HomogeneousPoint, HomogeneousPoint)> {
    let svd = svd3(f.matrix());
    let s = svd.s;
    if s[2] > RANK_TOLERANCE * s[0] {
        return Err(Error::Rank(format!(
            "smallest singular value {:e} exceeds tolerance",
            s[2] / s[0]
        )));
    }
    if s[1] <= RANK_TOLERANCE * s[0] {
        return Err(degenerate("matrix has rank at most 1"));
    }
    let e1 = canonical_sign(svd.v.column(2).into_owned().normalize());
    let e2 = canonical_sign(svd.u.column(2).into_owned().normalize());
    Ok((HomogeneousPoint(e1), HomogeneousPoint(e2)))
}

/// Nearest rank-2 matrix in Frobenius norm, canonicalized.
pub fn enforce_rank2(m: &Matrix3<f64>) -> Result<FundamentalMatrix> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if m.norm() == 0.0 {
        return Err(invalid("zero matrix"));
    }
    let svd = svd3(m);
    if svd.s[1] <= 1e-12 * svd.s[0] {
        return Err(degenerate("matrix has rank at most 1"));
    }
    let d = Matrix3::from_diagonal(&Vector3::new(svd.s[0], svd.s[1], 0.0));
    let r2 = svd.u * d * svd.v.transpose();
    Ok(FundamentalMatrix(canonical_matrix(&r2)?))
}

/// Similarity taking a point set to zero centroid and mean radius `sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform(Matrix3<f64>);

impl NormalizationTransform {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        let s = self.0[(0, 0)];
        let (tx, ty) = (self.0[(0, 2)], self.0[(1, 2)]);
        Matrix3::new(1.0 / s, 0.0, -tx / s, 0.0, 1.0 / s, -ty / s, 0.0, 0.0, 1.0)
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let s = self.0[(0, 0)];
        (s * x + self.0[(0, 2)], s * y + self.0[(1, 2)])
    }
}

/// Hartley normalization of a finite point set.
pub fn normalize_points(
    points: &[HomogeneousPoint],
) -> Result<(NormalizationTransform, Vec<HomogeneousPoint>)> {
    let pixels = points
        .iter()
        .map(HomogeneousPoint::pixel)
        .collect::<Result<Vec<_>>>()?;
    let t = normalization_for(&pixels)?;
    let out = pixels
        .iter()
        .map(|&(x, y)| {
            let (u, v) = t.apply(x, y);
            HomogeneousPoint::from_pixel(u, v)
        })
        .collect();
    Ok((t, out))
}

pub(crate) fn normalization_for(pixels: &[(f64, f64)]) -> Result<NormalizationTransform> {
    if pixels.len() < 2 {
        return Err(invalid("normalization needs at least two points"));
    }
    let n = pixels.len() as f64;
    let (sx, sy) = pixels
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (cx, cy) = (sx / n, sy / n);
    let mean_r = pixels
        .iter()
        .map(|&(x, y)| (x - cx).hypot(y - cy))
        .sum::<f64>()
        / n;
    let extent = pixels
        .iter()
        .fold(0.0f64, |m, &(x, y)| m.max(x.abs()).max(y.abs()))
        .max(1.0);
    if mean_r <= 1e-12 * extent {
        return Err(degenerate("all points coincide"));
    }
    let s = std::f64::consts::SQRT_2 / mean_r;
    Ok(NormalizationTransform(Matrix3::new(
        s,
        0.0,
        -s * cx,
        0.0,
        s,
        -s * cy,
        0.0,
        0.0,
        1.0,
    )))
}

/// `min(||f1 - f2||_F, ||f1 + f2||_F)`: zero iff equal up to sign.
pub fn compare_f(f1: &FundamentalMatrix, f2: &FundamentalMatrix) -> f64 {
    let a = f1.matrix();
    let b = f2.matrix();
    (a - b).norm().min((a + b).norm())
}
