//! The points-based parametrization of the epipolar homography.
//!
//! A point on a reference line `l` through control points `x1`, `x2` is
//! written as `alpha * x1 + beta * x2`. Corresponding epipolar lines meet the
//! reference lines of the two images in points whose coefficient pairs are
//! related by a 2x2 projective map `H_e`:
//!
//! ```text
//! (alpha', beta')^T ~ H_e (alpha, beta)^T
//! ```
//!
//! Together with the two epipoles this gives
//! `F ~ [e2]x [x1' x2'] H_e [x2^T; -x1^T] [e1]x`.

use nalgebra::{Matrix2, Matrix2x3, Matrix3x2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Result};
use crate::geometry::{enforce_rank2, epipoles, skew_unchecked, FundamentalMatrix, HomogeneousPoint};
use crate::linalg::right_singular;

/// Default off-line tolerance, in pixels, for [`coefficients_of_point`].
pub const ON_LINE_TOLERANCE: f64 = 1e-4;

/// Minimum distance in pixels between an epipole and a reference line.
pub const EPIPOLE_LINE_CLEARANCE: f64 = 1e-6;

/// `(alpha, beta)` coefficients of a point with respect to two control
/// points, defined up to a common scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl LineCoefficients {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || (alpha == 0.0 && beta == 0.0) {
            return Err(invalid("line coefficients must be finite and not both zero"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn vector(&self) -> Vector2<f64> {
        Vector2::new(self.alpha, self.beta)
    }

    /// Projective equality up to a relative tolerance.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        let a = self.vector().normalize();
        let b = other.vector().normalize();
        (a.x * b.y - a.y * b.x).abs() <= tol
    }

    /// The homogeneous point `alpha * x1 + beta * x2`.
    pub fn point(&self, x1: &HomogeneousPoint, x2: &HomogeneousPoint) -> Vector3<f64> {
        x1.coords() * self.alpha + x2.coords() * self.beta
    }
}

/// The 2x2 epipolar homography in canonical form (unit Frobenius norm,
/// largest-magnitude entry positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpipolarHomography1D(Matrix2<f64>);

impl EpipolarHomography1D {
    pub fn new(h: Matrix2<f64>) -> Result<Self> {
        let norm = h.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("epipolar homography must be nonzero and finite"));
        }
        let mut c = h / norm;
        let mut best = (0, 0);
        for r in 0..2 {
            for k in 0..2 {
                if c[(r, k)].abs() > c[best].abs() {
                    best = (r, k);
                }
            }
        }
        if c[best] < 0.0 {
            c = -c;
        }
        Ok(Self(c))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    /// Row-major `[a, b, c, d]`.
    pub fn entries(&self) -> [f64; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .0
            .try_inverse()
            .ok_or_else(|| degenerate("epipolar homography is singular"))?;
        Self::new(inv)
    }

    /// Distance between two homographies up to sign.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.0 - other.0).norm().min((self.0 + other.0).norm())
    }
}

/// Fixed control points on the reference line of each image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPointPair {
    pub x1: HomogeneousPoint,
    pub x2: HomogeneousPoint,
    pub x1p: HomogeneousPoint,
    pub x2p: HomogeneousPoint,
}

impl ControlPointPair {
    pub fn new(
        x1: HomogeneousPoint,
        x2: HomogeneousPoint,
        x1p: HomogeneousPoint,
        x2p: HomogeneousPoint,
    ) -> Result<Self> {
        if x1.same_as(&x2, 1e-12) || x1p.same_as(&x2p, 1e-12) {
            return Err(degenerate("control points of a line must be distinct"));
        }
        Ok(Self { x1, x2, x1p, x2p })
    }

    /// Reference line through the image-1 control points.
    pub fn line1(&self) -> Vector3<f64> {
        self.x1.coords().cross(self.x2.coords())
    }

    pub fn line2(&self) -> Vector3<f64> {
        self.x1p.coords().cross(self.x2p.coords())
    }

    /// The same lines with the image-2 control points exchanged.
    pub fn with_swapped_second(&self) -> Self {
        Self {
            x1p: self.x2p,
            x2p: self.x1p,
            ..*self
        }
    }
}

/// Coefficients of `p` with respect to `x1`, `x2`. `p` must lie within
/// [`ON_LINE_TOLERANCE`] pixels of the line through them.
pub fn coefficients_of_point(
    p: &HomogeneousPoint,
    x1: &HomogeneousPoint,
    x2: &HomogeneousPoint,
) -> Result<LineCoefficients> {
    coefficients_within(p, x1, x2, ON_LINE_TOLERANCE)
}

/// As [`coefficients_of_point`] with an explicit tolerance. Finite points are
/// projected orthogonally onto the line before solving, so measured points a
/// little off the line get the coefficients of their foot point.
pub fn coefficients_within(
    p: &HomogeneousPoint,
    x1: &HomogeneousPoint,
    x2: &HomogeneousPoint,
    tol: f64,
) -> Result<LineCoefficients> {
    if x1.same_as(x2, 1e-12) {
        return Err(degenerate("control points coincide"));
    }
    let line = x1.coords().cross(x2.coords());
    let target = match p.to_pixel() {
        Some((x, y)) => {
            let n = line.x.hypot(line.y);
            if n == 0.0 {
                return Err(invalid("control points span the line at infinity"));
            }
            let d = (line.x * x + line.y * y + line.z) / n;
            if d.abs() > tol {
                return Err(invalid(format!(
                    "point is {:.3e} px off the control line (tolerance {tol:e})",
                    d.abs()
                )));
            }
            Vector3::new(x - d * line.x / n, y - d * line.y / n, 1.0)
        }
        None => {
            let u = p.coords().normalize();
            if line.dot(&u).abs() > 1e-9 * line.norm() {
                return Err(invalid("ideal point does not lie on the control line"));
            }
            u
        }
    };
    solve_in_span(&target, x1.coords(), x2.coords())
}

/// Least-squares `(alpha, beta)` with `alpha * x1 + beta * x2 ~ target`.
fn solve_in_span(target: &Vector3<f64>, x1: &Vector3<f64>, x2: &Vector3<f64>) -> Result<LineCoefficients> {
    let a = Matrix3x2::from_columns(&[*x1, *x2]);
    let svd = a.svd(true, true);
    let sol = svd
        .solve(target, 1e-14)
        .map_err(|e| degenerate(format!("coefficient solve failed: {e}")))?;
    LineCoefficients::new(sol.x, sol.y)
}

/// Fits `H_e` to three coefficient correspondences as the null direction of
/// `alpha' (c alpha + d beta) - beta' (a alpha + b beta) = 0`.
pub fn homography_1d_from_3(
    pairs: &[(LineCoefficients, LineCoefficients); 3],
) -> Result<EpipolarHomography1D> {
    for i in 0..3 {
        for j in (i + 1)..3 {
            if pairs[i].0.same_as(&pairs[j].0, 1e-12) {
                return Err(degenerate("repeated source coefficients"));
            }
            if pairs[i].1.same_as(&pairs[j].1, 1e-12) {
                return Err(degenerate("repeated target coefficients"));
            }
        }
    }
    let mut a = nalgebra::DMatrix::zeros(3, 4);
    for (row, (src, dst)) in pairs.iter().enumerate() {
        let s = src.vector().normalize();
        let t = dst.vector().normalize();
        a[(row, 0)] = -t.y * s.x;
        a[(row, 1)] = -t.y * s.y;
        a[(row, 2)] = t.x * s.x;
        a[(row, 3)] = t.x * s.y;
    }
    let sv = right_singular(&a);
    if sv.values[2] <= 1e-12 * sv.values[0] {
        return Err(degenerate("homography system has rank below 3"));
    }
    let h = sv.smallest(0);
    EpipolarHomography1D::new(Matrix2::new(h[0], h[1], h[2], h[3]))
}

/// `(alpha', beta') = h (alpha, beta)`.
pub fn apply_homography_1d(h: &EpipolarHomography1D, c: &LineCoefficients) -> Result<LineCoefficients> {
    let out = h.matrix() * c.vector();
    let scale = c.vector().norm();
    if out.norm() <= 1e-14 * scale {
        return Err(degenerate("coefficients lie in the kernel of the homography"));
    }
    LineCoefficients::new(out.x, out.y)
}

fn check_clearance(e: &HomogeneousPoint, line: &Vector3<f64>, which: &str) -> Result<()> {
    let n = line.x.hypot(line.y);
    let clear = match e.to_pixel() {
        Some((x, y)) => (line.x * x + line.y * y + line.z).abs() / n > EPIPOLE_LINE_CLEARANCE,
        None => line.dot(&e.coords().normalize()).abs() > 1e-9 * n,
    };
    if clear {
        Ok(())
    } else {
        Err(invalid(format!("epipole lies on the {which} control line")))
    }
}

/// `F ~ [e2]x [x1' x2'] H_e [x2^T; -x1^T] [e1]x`, canonicalized.
pub fn compose_f(
    e1: &HomogeneousPoint,
    e2: &HomogeneousPoint,
    cps: &ControlPointPair,
    h: &EpipolarHomography1D,
) -> Result<FundamentalMatrix> {
    check_clearance(e1, &cps.line1(), "first")?;
    check_clearance(e2, &cps.line2(), "second")?;
    let span2 = Matrix3x2::from_columns(&[*cps.x1p.coords(), *cps.x2p.coords()]);
    let pick1 = Matrix2x3::from_rows(&[
        cps.x2.coords().transpose(),
        -cps.x1.coords().transpose(),
    ]);
    let m = skew_unchecked(e2.coords()) * span2 * h.matrix() * pick1 * skew_unchecked(e1.coords());
    enforce_rank2(&m).map_err(|e| match e {
        crate::Error::InvalidArgument(msg) | crate::Error::Degenerate(msg) => degenerate(msg),
        other => other,
    })
}

/// Recovers `H_e` of `f` relative to the given control points by transferring
/// three points of the first reference line through `f`.
pub fn extract_homography_1d(f: &FundamentalMatrix, cps: &ControlPointPair) -> Result<EpipolarHomography1D> {
    let (e1, e2) = epipoles(f)?;
    check_clearance(&e1, &cps.line1(), "first")?;
    check_clearance(&e2, &cps.line2(), "second")?;
    let line2 = cps.line2();
    let sources = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let mut pairs = Vec::with_capacity(3);
    for (a, b) in sources {
        let src = LineCoefficients::new(a, b)?;
        let p = src.point(&cps.x1, &cps.x2);
        let epiline = f.matrix() * p;
        let meet = epiline.cross(&line2);
        if meet.norm() == 0.0 {
            return Err(degenerate("epipolar line coincides with the second control line"));
        }
        let dst = solve_in_span(&meet.normalize(), cps.x1p.coords(), cps.x2p.coords())?;
        pairs.push((src, dst));
    }
    homography_1d_from_3(&[pairs[0], pairs[1], pairs[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::compare_f;

    fn c(a: f64, b: f64) -> LineCoefficients {
        LineCoefficients::new(a, b).unwrap()
    }

    fn px(x: f64, y: f64) -> HomogeneousPoint {
        HomogeneousPoint::from_pixel(x, y)
    }

    #[test]
    fn coefficient_examples() {
        let x1 = px(0.0, 0.0);
        let x2 = px(2.0, 0.0);
        let k = coefficients_of_point(&x1, &x1, &x2).unwrap();
        assert!(k.same_as(&c(1.0, 0.0), 1e-12));
        let k = coefficients_of_point(&px(1.0, 0.0), &x1, &x2).unwrap();
        assert!(k.same_as(&c(1.0, 1.0), 1e-12));
        assert!(coefficients_of_point(&px(1.0, 0.5), &x1, &x2).is_err());
    }

    #[test]
    fn homography_from_three_examples() {
        let id = homography_1d_from_3(&[
            (c(1.0, 0.0), c(1.0, 0.0)),
            (c(0.0, 1.0), c(0.0, 1.0)),
            (c(1.0, 1.0), c(1.0, 1.0)),
        ])
        .unwrap();
        let expected = EpipolarHomography1D::new(Matrix2::identity()).unwrap();
        assert!(id.distance(&expected) <= 1e-12);

        let h = homography_1d_from_3(&[
            (c(1.0, 0.0), c(1.0, 0.0)),
            (c(0.0, 1.0), c(0.0, 1.0)),
            (c(1.0, 1.0), c(2.0, 1.0)),
        ])
        .unwrap();
        let expected = EpipolarHomography1D::new(Matrix2::new(2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(h.distance(&expected) <= 1e-9);

        let dup = homography_1d_from_3(&[
            (c(1.0, 0.0), c(1.0, 0.0)),
            (c(2.0, 0.0), c(0.0, 1.0)),
            (c(1.0, 1.0), c(1.0, 1.0)),
        ]);
        assert!(matches!(dup, Err(crate::Error::Degenerate(_))));
    }

    #[test]
    fn apply_examples() {
        let id = EpipolarHomography1D::new(Matrix2::identity()).unwrap();
        assert!(apply_homography_1d(&id, &c(3.0, -1.0)).unwrap().same_as(&c(3.0, -1.0), 1e-15));
        let h = EpipolarHomography1D::new(Matrix2::new(2.0, 0.0, 0.0, 1.0)).unwrap();
        let out = apply_homography_1d(&h, &c(1.0, 1.0)).unwrap();
        assert!(out.same_as(&c(2.0, 1.0), 1e-15));
        let back = apply_homography_1d(&h.inverse().unwrap(), &out).unwrap();
        assert!(back.same_as(&c(1.0, 1.0), 1e-9));
        let singular = EpipolarHomography1D::new(Matrix2::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(apply_homography_1d(&singular, &c(0.0, 1.0)).is_err());
    }

    #[test]
    fn compose_rejects_epipole_on_line() {
        let cps = ControlPointPair::new(px(0.0, 0.0), px(10.0, 0.0), px(0.0, 5.0), px(10.0, 5.0)).unwrap();
        let h = EpipolarHomography1D::new(Matrix2::identity()).unwrap();
        let on = px(3.0, 0.0);
        let off = px(3.0, 7.0);
        assert!(matches!(compose_f(&on, &off, &cps, &h), Err(crate::Error::InvalidArgument(_))));
        assert!(compose_f(&off, &px(1.0, 1.0), &cps, &h).is_ok());
    }

    #[test]
    fn compose_is_scale_free_in_h() {
        let cps = ControlPointPair::new(px(0.0, 0.0), px(10.0, 0.0), px(0.0, 5.0), px(10.0, 5.0)).unwrap();
        let e1 = px(3.0, 40.0);
        let e2 = px(-20.0, 30.0);
        let m = Matrix2::new(1.0, 0.3, -0.2, 0.9);
        let f1 = compose_f(&e1, &e2, &cps, &EpipolarHomography1D::new(m).unwrap()).unwrap();
        let f2 = compose_f(&e1, &e2, &cps, &EpipolarHomography1D::new(m * -7.5).unwrap()).unwrap();
        assert!(compare_f(&f1, &f2) <= 1e-12);
        let h = extract_homography_1d(&f1, &cps).unwrap();
        assert!(h.distance(&EpipolarHomography1D::new(m).unwrap()) <= 1e-9);
    }
}
