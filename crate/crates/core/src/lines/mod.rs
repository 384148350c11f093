//! Finding the pair of corresponding image lines that carries the most
//! putative correspondences.
//!
//! Each image is rasterized and searched for lines with a Hough transform
//! independently of the other. A joint accumulator then records, per
//! correspondence, which lines of each image it lies near. The selected pair
//! maximizes the number of correspondences near *both* of its lines.

mod accumulator;
mod hough;
mod raster;

use nalgebra::{Matrix2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use accumulator::{
    accumulate, accumulate_sequential, best_line_pair, nearby_lines, Accumulator, MIN_LINE_SUPPORT,
};
pub use hough::{hough_lines, HoughParams};
pub use raster::{rasterize, BinaryGrid, BitSet};

use crate::correspondence::CorrespondenceSet;
use crate::error::{invalid, Result};
use crate::geometry::{pixel_line_distance, ImageLine};

/// A matched line pair and the correspondences lying near both lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineMatch {
    /// Line in image 1, original pixels.
    pub line1: ImageLine,
    pub line2: ImageLine,
    /// Ids of the correspondences near both lines, ascending.
    pub member_indices: Vec<usize>,
    /// Joint support, `member_indices.len()` at selection time.
    pub score: usize,
    /// Literal per-image vote sum of the selected pair.
    pub vote_sum: usize,
    /// Indices of the pair within the detected line lists.
    pub line_ids: (usize, usize),
}

/// Rasterize, detect, accumulate and select. Returns `None` when no line pair
/// has [`MIN_LINE_SUPPORT`] shared correspondences.
pub fn find_line_match(
    corrs: &CorrespondenceSet,
    params: &HoughParams,
    seed: u64,
) -> Result<Option<LineMatch>> {
    params.validate()?;
    if corrs.len() < MIN_LINE_SUPPORT {
        return Err(invalid(format!(
            "line matching needs at least {MIN_LINE_SUPPORT} correspondences"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detect_ids: Vec<usize> = match params.detection_subsample {
        Some(k) if k < corrs.len() => {
            let mut ids = rand::seq::index::sample(&mut rng, corrs.len(), k).into_vec();
            ids.sort_unstable();
            ids
        }
        _ => (0..corrs.len()).collect(),
    };
    let pts1: Vec<_> = detect_ids.iter().map(|&i| corrs.pairs()[i].x).collect();
    let pts2: Vec<_> = detect_ids.iter().map(|&i| corrs.pairs()[i].xp).collect();

    let (lines1, lines2) = rayon::join(
        || detect(&pts1, corrs.size1(), params),
        || detect(&pts2, corrs.size2(), params),
    );
    let ((lines1, scale1), (lines2, scale2)) = (lines1?, lines2?);
    if lines1.is_empty() || lines2.is_empty() {
        return Ok(None);
    }
    let c1 = params.neighbor_distance / scale1;
    let c2 = params.neighbor_distance / scale2;
    let acc = accumulate(corrs, &lines1, &lines2, c1, c2);
    let tie_seed = rand::Rng::random::<u64>(&mut rng);
    let Some(found) = best_line_pair(&acc, &lines1, &lines2, tie_seed) else {
        return Ok(None);
    };
    Ok(Some(refine(corrs, found, c1, c2)))
}

fn detect(
    points: &[(f64, f64)],
    size: crate::correspondence::ImageSize,
    params: &HoughParams,
) -> Result<(Vec<ImageLine>, f64)> {
    let grid = rasterize(points, size, params.target_width)?;
    Ok((hough_lines(&grid, params)?, grid.scale))
}

/// Total-least-squares line through a point set.
pub fn fit_line(points: &[(f64, f64)]) -> Option<ImageLine> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (cx, cy) = (sx / n, sy / n);
    let mut cov = Matrix2::zeros();
    for &(x, y) in points {
        let (dx, dy) = (x - cx, y - cy);
        cov[(0, 0)] += dx * dx;
        cov[(0, 1)] += dx * dy;
        cov[(1, 1)] += dy * dy;
    }
    cov[(1, 0)] = cov[(0, 1)];
    let eig = cov.symmetric_eigen();
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let normal = eig.eigenvectors.column(k);
    ImageLine::new(Vector3::new(normal[0], normal[1], -(normal[0] * cx + normal[1] * cy))).ok()
}

/// Replaces the quantized Hough lines by least-squares fits to the members and
/// recomputes membership; keeps the Hough result if support would drop below
/// the minimum.
fn refine(corrs: &CorrespondenceSet, found: LineMatch, c1: f64, c2: f64) -> LineMatch {
    let pick = |f: fn(&crate::correspondence::Correspondence) -> (f64, f64)| -> Vec<(f64, f64)> {
        found.member_indices.iter().map(|&i| f(&corrs.pairs()[i])).collect()
    };
    let (Some(l1), Some(l2)) = (fit_line(&pick(|c| c.x)), fit_line(&pick(|c| c.xp))) else {
        return found;
    };
    let (a, b) = (l1.coeffs(), l2.coeffs());
    let members: Vec<usize> = corrs
        .pairs()
        .iter()
        .filter(|p| pixel_line_distance(p.x.0, p.x.1, &a) < c1 && pixel_line_distance(p.xp.0, p.xp.1, &b) < c2)
        .map(|p| p.index)
        .collect();
    if members.len() < MIN_LINE_SUPPORT {
        return found;
    }
    LineMatch {
        line1: l1,
        line2: l2,
        score: members.len(),
        member_indices: members,
        ..found
    }
}
