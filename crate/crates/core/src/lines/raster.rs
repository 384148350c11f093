use crate::correspondence::ImageSize;
use crate::error::{invalid, Result};

/// A fixed-size bitset; used for raster cells and accumulator columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|self & other|` without materializing the intersection.
    pub fn intersection_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersection(&self, other: &Self) -> Vec<usize> {
        self.iter().filter(|&i| other.contains(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }
}

/// A binary image of the point positions at (possibly) reduced resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGrid {
    pub width: usize,
    pub height: usize,
    /// Grid cells per original pixel.
    pub scale: f64,
    cells: BitSet,
}

impl BinaryGrid {
    pub fn is_set(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.cells.contains(y * self.width + x)
    }

    pub fn set_count(&self) -> usize {
        self.cells.count()
    }

    /// Coordinates of set cells in row-major order.
    pub fn set_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().map(|i| (i % self.width, i / self.width))
    }

    /// Maps an original-resolution pixel to its cell.
    pub fn cell_of(&self, (x, y): (f64, f64)) -> (usize, usize) {
        let cx = (x * self.scale).round().clamp(0.0, (self.width - 1) as f64) as usize;
        let cy = (y * self.scale).round().clamp(0.0, (self.height - 1) as f64) as usize;
        (cx, cy)
    }
}

/// Marks the cell of every point on a grid `target_width` cells wide. Images
/// narrower than `target_width` are not upscaled.
pub fn rasterize(points: &[(f64, f64)], size: ImageSize, target_width: usize) -> Result<BinaryGrid> {
    if points.is_empty() {
        return Err(invalid("cannot rasterize an empty point list"));
    }
    if !(size.width > 0.0 && size.height > 0.0) {
        return Err(invalid("image size must be positive"));
    }
    let full_width = size.width.ceil() as usize;
    let (width, scale) = if target_width >= full_width {
        (full_width.max(1), 1.0)
    } else {
        (target_width, target_width as f64 / size.width)
    };
    let height = ((size.height * scale).round() as usize).max(1);
    let mut grid = BinaryGrid {
        width,
        height,
        scale,
        cells: BitSet::new(width * height),
    };
    for &p in points {
        let (cx, cy) = grid.cell_of(p);
        grid.cells.insert(cy * width + cx);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_downscale_keeps_points() {
        let pts = [(1.0, 1.0), (5.0, 7.0), (9.0, 2.0)];
        let g = rasterize(&pts, ImageSize::new(20.0, 10.0), 512).unwrap();
        assert_eq!(g.scale, 1.0);
        assert_eq!(g.set_count(), 3);
        assert!(g.is_set(5, 7));
    }

    #[test]
    fn half_scale() {
        let g = rasterize(&[(1000.0, 500.0)], ImageSize::new(1024.0, 768.0), 512).unwrap();
        assert_eq!((g.width, g.height), (512, 384));
        assert!(g.is_set(500, 250));
    }

    #[test]
    fn colliding_points_share_a_cell() {
        let g = rasterize(&[(10.0, 10.0), (10.4, 10.3)], ImageSize::new(1024.0, 768.0), 512).unwrap();
        assert_eq!(g.set_count(), 1);
        assert!(rasterize(&[], ImageSize::new(10.0, 10.0), 512).is_err());
    }

    #[test]
    fn bitset_ops() {
        let mut a = BitSet::new(130);
        let mut b = BitSet::new(130);
        for i in [0, 3, 64, 129] {
            a.insert(i);
        }
        for i in [3, 64, 100] {
            b.insert(i);
        }
        assert_eq!(a.count(), 4);
        assert_eq!(a.intersection_count(&b), 2);
        assert_eq!(a.intersection(&b), vec![3, 64]);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 3, 64, 129]);
    }
}
