use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correspondence::CorrespondenceSet;
use crate::geometry::{pixel_line_distance, ImageLine};
use crate::lines::raster::BitSet;
use crate::lines::LineMatch;

/// Minimum joint support of a matched line pair: three points for the
/// homography sample plus one to verify it.
pub const MIN_LINE_SUPPORT: usize = 4;

/// Indices of the lines strictly closer than `c` to a finite pixel position.
pub fn nearby_lines(point: (f64, f64), lines: &[ImageLine], c: f64) -> Vec<usize> {
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| pixel_line_distance(point.0, point.1, &l.coeffs()) < c)
        .map(|(i, _)| i)
        .collect()
}

/// The `N x K1 x K2` vote array stored as its two factors: for each line of
/// image 1 the set of correspondences near it, and likewise for image 2.
///
/// Entry `(j, m, n)` equals `[j near line m] + [j near line n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Accumulator {
    n: usize,
    near1: Vec<BitSet>,
    near2: Vec<BitSet>,
}

impl Accumulator {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.near1.len(), self.near2.len())
    }

    pub fn entry(&self, j: usize, m: usize, n: usize) -> u8 {
        self.near1[m].contains(j) as u8 + self.near2[n].contains(j) as u8
    }

    /// `|{j : A(j, m, n) = 2}|`.
    pub fn joint_score(&self, m: usize, n: usize) -> usize {
        self.near1[m].intersection_count(&self.near2[n])
    }

    /// `sum_j A(j, m, n)`, the literal vote sum. It separates into
    /// independent per-image counts and is kept for diagnostics.
    pub fn vote_sum(&self, m: usize, n: usize) -> usize {
        self.near1[m].count() + self.near2[n].count()
    }

    pub fn joint_members(&self, m: usize, n: usize) -> Vec<usize> {
        self.near1[m].intersection(&self.near2[n])
    }
}

fn membership(points: impl Iterator<Item = (f64, f64)>, n: usize, lines: &[ImageLine], c: f64) -> Vec<BitSet> {
    let mut near = vec![BitSet::new(n); lines.len()];
    for (j, p) in points.enumerate() {
        for m in nearby_lines(p, lines, c) {
            near[m].insert(j);
        }
    }
    near
}

/// Builds the accumulator. The two images are processed independently (and
/// concurrently); `c1`, `c2` are the neighbor distances in each image's
/// original pixels.
pub fn accumulate(
    corrs: &CorrespondenceSet,
    lines1: &[ImageLine],
    lines2: &[ImageLine],
    c1: f64,
    c2: f64,
) -> Accumulator {
    let n = corrs.len();
    let (near1, near2) = rayon::join(
        || membership(corrs.pairs().iter().map(|p| p.x), n, lines1, c1),
        || membership(corrs.pairs().iter().map(|p| p.xp), n, lines2, c2),
    );
    Accumulator { n, near1, near2 }
}

/// Sequential twin of [`accumulate`], used to check scheduling independence.
pub fn accumulate_sequential(
    corrs: &CorrespondenceSet,
    lines1: &[ImageLine],
    lines2: &[ImageLine],
    c1: f64,
    c2: f64,
) -> Accumulator {
    let n = corrs.len();
    let near1 = membership(corrs.pairs().iter().map(|p| p.x), n, lines1, c1);
    let near2 = membership(corrs.pairs().iter().map(|p| p.xp), n, lines2, c2);
    Accumulator { n, near1, near2 }
}

/// The line pair with the largest joint support, or `None` below
/// [`MIN_LINE_SUPPORT`]. Ties are broken by a seeded random choice.
pub fn best_line_pair(
    acc: &Accumulator,
    lines1: &[ImageLine],
    lines2: &[ImageLine],
    seed: u64,
) -> Option<LineMatch> {
    let (_, k1, k2) = acc.dims();
    let mut best = 0;
    let mut tied = Vec::new();
    for m in 0..k1 {
        for n in 0..k2 {
            let s = acc.joint_score(m, n);
            if s > best {
                best = s;
                tied.clear();
            }
            if s == best && s > 0 {
                tied.push((m, n));
            }
        }
    }
    if best < MIN_LINE_SUPPORT {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let &(m, n) = tied.choose(&mut rng)?;
    Some(LineMatch {
        line1: lines1[m],
        line2: lines2[n],
        member_indices: acc.joint_members(m, n),
        score: best,
        vote_sum: acc.vote_sum(m, n),
        line_ids: (m, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::ImageSize;
    use nalgebra::Vector3;

    fn horizontal(y: f64) -> ImageLine {
        ImageLine::new(Vector3::new(0.0, 1.0, -y)).unwrap()
    }

    #[test]
    fn nearby_lines_is_strict() {
        let lines = [horizontal(0.0), horizontal(10.0)];
        assert_eq!(nearby_lines((5.0, 0.0), &lines, 2.0), vec![0]);
        assert_eq!(nearby_lines((5.0, 2.0), &lines, 2.0), Vec::<usize>::new());
        assert!(nearby_lines((5.0, 2.0), &[], 2.0).is_empty());
    }

    #[test]
    fn hand_computed_entries() {
        let size = ImageSize::new(100.0, 100.0);
        let corrs = CorrespondenceSet::new(
            vec![((5.0, 10.0), (5.0, 50.0)), ((50.0, 80.0), (50.0, 5.0))],
            size,
            size,
        )
        .unwrap();
        let l1 = [horizontal(10.0), horizontal(30.0)];
        let l2 = [horizontal(50.0), horizontal(70.0)];
        let acc = accumulate(&corrs, &l1, &l2, 2.0, 2.0);
        assert_eq!(acc.entry(0, 0, 0), 2);
        assert_eq!(acc.entry(0, 0, 1), 1);
        assert_eq!(acc.entry(0, 1, 1), 0);
        for m in 0..2 {
            for n in 0..2 {
                assert_eq!(acc.entry(1, m, n), 0);
            }
        }
    }

    #[test]
    fn three_shared_members() {
        let size = ImageSize::new(100.0, 100.0);
        let corrs = CorrespondenceSet::new(
            (0..3).map(|i| ((10.0 * i as f64, 10.0), (10.0 * i as f64, 50.0))),
            size,
            size,
        )
        .unwrap();
        let acc = accumulate(&corrs, &[horizontal(10.0)], &[horizontal(50.0)], 2.0, 2.0);
        assert_eq!(acc.joint_score(0, 0), 3);
        assert!(best_line_pair(&acc, &[horizontal(10.0)], &[horizontal(50.0)], 0).is_none());
    }

    #[test]
    fn tie_break_is_seeded() {
        let size = ImageSize::new(100.0, 100.0);
        let mut pairs = Vec::new();
        for i in 0..5 {
            pairs.push(((10.0 * i as f64, 10.0), (10.0 * i as f64, 50.0)));
            pairs.push(((10.0 * i as f64 + 3.0, 30.0), (10.0 * i as f64 + 3.0, 70.0)));
        }
        let corrs = CorrespondenceSet::new(pairs, size, size).unwrap();
        let l1 = [horizontal(10.0), horizontal(30.0)];
        let l2 = [horizontal(50.0), horizontal(70.0)];
        let acc = accumulate(&corrs, &l1, &l2, 2.0, 2.0);
        let a = best_line_pair(&acc, &l1, &l2, 42).unwrap();
        let b = best_line_pair(&acc, &l1, &l2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.score, 5);
        let picks: std::collections::HashSet<_> =
            (0..32).map(|s| best_line_pair(&acc, &l1, &l2, s).unwrap().line_ids).collect();
        assert_eq!(picks.len(), 2);
    }
}
