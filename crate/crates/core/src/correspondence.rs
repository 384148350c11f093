//! Putative point correspondences between two images.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::HomogeneousPoint;

/// One putative match `(x, x')` in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub x: (f64, f64),
    pub xp: (f64, f64),
    /// Id into the putative set; unique within a [`CorrespondenceSet`].
    pub index: usize,
}

impl Correspondence {
    pub fn new(index: usize, x: (f64, f64), xp: (f64, f64)) -> Self {
        Self { x, xp, index }
    }

    pub fn first(&self) -> HomogeneousPoint {
        HomogeneousPoint::from_pixel(self.x.0, self.x.1)
    }

    pub fn second(&self) -> HomogeneousPoint {
        HomogeneousPoint::from_pixel(self.xp.0, self.xp.1)
    }
}

/// Image dimensions in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: f64,
    pub height: f64,
}

impl ImageSize {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y)
    }
}

/// An ordered set of unique putative correspondences with the sizes of both
/// images. `pairs[i].index == i` always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pairs: Vec<Correspondence>,
    size1: ImageSize,
    size2: ImageSize,
}

impl CorrespondenceSet {
    /// Builds a set from pixel pairs, re-indexing them `0..n`.
    pub fn new(
        pairs: impl IntoIterator<Item = ((f64, f64), (f64, f64))>,
        size1: ImageSize,
        size2: ImageSize,
    ) -> Result<Self> {
        let pairs: Vec<_> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (x, xp))| Correspondence::new(i, x, xp))
            .collect();
        if pairs.is_empty() {
            return Err(invalid("correspondence set is empty"));
        }
        let mut seen = HashSet::with_capacity(pairs.len());
        for c in &pairs {
            let coords = [c.x.0, c.x.1, c.xp.0, c.xp.1];
            if coords.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("correspondence {} is not finite", c.index)));
            }
            if !size1.contains(c.x) || !size2.contains(c.xp) {
                return Err(invalid(format!(
                    "correspondence {} lies outside the image bounds",
                    c.index
                )));
            }
            if !seen.insert(coords.map(f64::to_bits)) {
                return Err(invalid(format!("correspondence {} is a duplicate", c.index)));
            }
        }
        Ok(Self { pairs, size1, size2 })
    }

    /// Bounds inferred as the maximum coordinates plus one pixel.
    pub fn with_inferred_bounds(
        pairs: impl IntoIterator<Item = ((f64, f64), (f64, f64))>,
    ) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let max = |f: fn(&((f64, f64), (f64, f64))) -> f64| {
            pairs.iter().map(f).fold(0.0f64, f64::max) + 1.0
        };
        let size1 = ImageSize::new(max(|p| p.0 .0), max(|p| p.0 .1));
        let size2 = ImageSize::new(max(|p| p.1 .0), max(|p| p.1 .1));
        Self::new(pairs, size1, size2)
    }

    pub fn pairs(&self) -> &[Correspondence] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn size1(&self) -> ImageSize {
        self.size1
    }

    pub fn size2(&self) -> ImageSize {
        self.size2
    }

    pub fn get(&self, index: usize) -> Option<&Correspondence> {
        self.pairs.get(index)
    }

    /// The subset with the given ids, re-indexed; bounds are kept.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        Self::new(
            ids.iter().map(|&i| (self.pairs[i].x, self.pairs[i].xp)),
            self.size1,
            self.size2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_bounds() {
        let size = ImageSize::new(10.0, 10.0);
        let dup = CorrespondenceSet::new(
            vec![((1.0, 1.0), (2.0, 2.0)), ((1.0, 1.0), (2.0, 2.0))],
            size,
            size,
        );
        assert!(dup.is_err());
        let out = CorrespondenceSet::new(vec![((11.0, 1.0), (2.0, 2.0))], size, size);
        assert!(out.is_err());
        assert!(CorrespondenceSet::new(Vec::new(), size, size).is_err());
    }

    #[test]
    fn inferred_bounds() {
        let set = CorrespondenceSet::with_inferred_bounds(vec![
            ((0.0, 0.0), (1.0, 1.0)),
            ((5.0, 2.0), (3.0, 9.0)),
        ])
        .unwrap();
        assert_eq!(set.size1(), ImageSize::new(6.0, 3.0));
        assert_eq!(set.size2(), ImageSize::new(4.0, 10.0));
        assert_eq!(set.pairs()[1].index, 1);
    }
}
