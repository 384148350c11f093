//! Normalized 8-point and 7-point fundamental-matrix solvers.

use nalgebra::{DMatrix, Matrix3};

use crate::correspondence::Correspondence;
use crate::error::{degenerate, invalid, Result};
use crate::geometry::{enforce_rank2, normalization_for, FundamentalMatrix, NormalizationTransform};
use crate::linalg::{mat3_from_row_major, right_singular};
use crate::solvers::solve_cubic;

/// Singular values below this fraction of the largest count as zero when
/// checking the rank of a design matrix.
const DESIGN_RANK_TOLERANCE: f64 = 1e-10;

struct Normalized {
    t1: NormalizationTransform,
    t2: NormalizationTransform,
    design: DMatrix<f64>,
}

fn normalized_design(corrs: &[Correspondence]) -> Result<Normalized> {
    let p1: Vec<_> = corrs.iter().map(|c| c.x).collect();
    let p2: Vec<_> = corrs.iter().map(|c| c.xp).collect();
    let t1 = normalization_for(&p1)?;
    let t2 = normalization_for(&p2)?;
    let mut design = DMatrix::zeros(corrs.len(), 9);
    for (row, (a, b)) in p1.iter().zip(&p2).enumerate() {
        let (x, y) = t1.apply(a.0, a.1);
        let (u, v) = t2.apply(b.0, b.1);
        // x'^T F x = 0 with F in row-major order.
        let r = [u * x, u * y, u, v * x, v * y, v, x, y, 1.0];
        for (k, value) in r.into_iter().enumerate() {
            design[(row, k)] = value;
        }
    }
    Ok(Normalized { t1, t2, design })
}

fn denormalize(n: &Normalized, f: &Matrix3<f64>) -> Matrix3<f64> {
    n.t2.matrix().transpose() * f * n.t1.matrix()
}

/// Normalized direct linear transform over at least eight correspondences,
/// followed by rank-2 enforcement.
pub fn eight_point(corrs: &[Correspondence]) -> Result<FundamentalMatrix> {
    if corrs.len() < 8 {
        return Err(invalid(format!(
            "eight-point needs at least 8 correspondences, got {}",
            corrs.len()
        )));
    }
    let n = normalized_design(corrs)?;
    let sv = right_singular(&n.design);
    if sv.values[7] <= DESIGN_RANK_TOLERANCE * sv.values[0] {
        return Err(degenerate("design matrix has rank below 8"));
    }
    let f_norm = mat3_from_row_major(sv.smallest(0).as_slice());
    let f_norm = enforce_rank2(&f_norm)?;
    enforce_rank2(&denormalize(&n, f_norm.matrix()))
}

/// Seven-point solver: one to three candidates from the real roots of
/// `det(l Fa + (1 - l) Fb) = 0`.
pub fn seven_point(corrs: &[Correspondence]) -> Result<Vec<FundamentalMatrix>> {
    if corrs.len() != 7 {
        return Err(invalid(format!(
            "seven-point needs exactly 7 correspondences, got {}",
            corrs.len()
        )));
    }
    let n = normalized_design(corrs)?;
    let sv = right_singular(&n.design);
    if sv.values[6] <= DESIGN_RANK_TOLERANCE * sv.values[0] {
        return Err(degenerate("null space of the design matrix exceeds dimension 2"));
    }
    let fa = mat3_from_row_major(sv.smallest(0).as_slice());
    let fb = mat3_from_row_major(sv.smallest(1).as_slice());
    let d = fa - fb;
    let det_at = |l: f64| (d * l + fb).determinant();

    // Interpolate the cubic from four samples.
    let p0 = det_at(0.0);
    let p1 = det_at(1.0);
    let pm1 = det_at(-1.0);
    let p2 = det_at(2.0);
    let c0 = p0;
    let c2 = 0.5 * (p1 + pm1) - c0;
    let odd = 0.5 * (p1 - pm1);
    let c3 = (p2 - c0 - 4.0 * c2 - 2.0 * odd) / 6.0;
    let c1 = odd - c3;

    let roots = solve_cubic(c3, c2, c1, c0)?;
    let candidates: Vec<_> = roots
        .into_iter()
        .filter_map(|l| {
            let f = d * l + fb;
            enforce_rank2(&denormalize(&n, &f)).ok()
        })
        .collect();
    if candidates.is_empty() {
        return Err(degenerate("no real root yields a rank-2 matrix"));
    }
    Ok(candidates)
}
