use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::ImageLine;
use crate::lines::raster::BinaryGrid;

/// Hough detection and neighborhood parameters. Steps and the neighbor
/// distance are in grid cells, i.e. pixels of the downscaled image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoughParams {
    pub rho_step: f64,
    pub theta_step: f64,
    pub min_votes: usize,
    pub target_width: usize,
    /// `C`: a point belongs to a line when strictly closer than this.
    pub neighbor_distance: f64,
    /// Detect lines from a random subset of this many correspondences;
    /// membership is still computed over all of them.
    pub detection_subsample: Option<usize>,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho_step: 1.0,
            theta_step: PI / 180.0,
            min_votes: 4,
            target_width: 512,
            neighbor_distance: 2.0,
            detection_subsample: None,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_step > 0.0) {
            return Err(invalid("rho_step must be positive"));
        }
        if !(self.theta_step > 0.0 && self.theta_step <= PI / 2.0) {
            return Err(invalid("theta_step must lie in (0, pi/2]"));
        }
        if self.min_votes < 4 {
            return Err(invalid("min_votes must be at least 4"));
        }
        if self.target_width < 64 {
            return Err(invalid("target_width must be at least 64"));
        }
        if !(self.neighbor_distance > 0.0) {
            return Err(invalid("neighbor distance must be positive"));
        }
        Ok(())
    }
}

struct Space {
    n_theta: usize,
    n_rho: usize,
    rho_offset: isize,
}

impl Space {
    fn index(&self, t: usize, r: usize) -> usize {
        t * self.n_rho + r
    }

    /// Neighbor bin, wrapping theta across pi where rho changes sign.
    fn neighbor(&self, t: usize, r: usize, dt: isize, dr: isize) -> Option<(usize, usize)> {
        let mut tt = t as isize + dt;
        let mut rr = r as isize + dr;
        if tt < 0 || tt >= self.n_theta as isize {
            tt = tt.rem_euclid(self.n_theta as isize);
            rr = 2 * self.rho_offset - rr;
        }
        (0..self.n_rho as isize)
            .contains(&rr)
            .then_some((tt as usize, rr as usize))
    }
}

/// `(rho, theta)` voting over the set cells of `grid`, with `theta` in
/// `[0, pi)`.
///
/// A bin's vote count is the number of cells within `neighbor_distance` of
/// its line. Returns bins with at least `min_votes` votes that survive 3x3
/// non-maximum suppression, most votes first, as lines in original-resolution
/// pixels.
pub fn hough_lines(grid: &BinaryGrid, params: &HoughParams) -> Result<Vec<ImageLine>> {
    params.validate()?;
    let n_theta = ((PI / params.theta_step).round() as usize).max(1);
    let diag = (grid.width as f64).hypot(grid.height as f64);
    let rho_offset = ((diag + params.neighbor_distance) / params.rho_step).ceil() as isize + 1;
    let space = Space {
        n_theta,
        n_rho: (2 * rho_offset + 1) as usize,
        rho_offset,
    };
    let trig: Vec<(f64, f64)> = (0..n_theta)
        .map(|t| {
            let th = t as f64 * params.theta_step;
            (th.cos(), th.sin())
        })
        .collect();

    // Each cell votes for every rho bin within the neighbor distance, weighted
    // by closeness, so sparse colinear cells share a bin even when the
    // quantized angle is slightly off. `counts` decides the vote threshold,
    // `weights` locate the peak.
    let radius = params.neighbor_distance / params.rho_step;
    let mut counts = vec![0u32; space.n_theta * space.n_rho];
    let mut weights = vec![0f64; space.n_theta * space.n_rho];
    for (x, y) in grid.set_cells() {
        let (x, y) = (x as f64, y as f64);
        for (t, &(c, s)) in trig.iter().enumerate() {
            let rho = (x * c + y * s) / params.rho_step;
            let lo = (rho - radius).ceil() as isize;
            let hi = (rho + radius).floor() as isize;
            for rb in lo..=hi {
                let i = space.index(t, (rb + rho_offset) as usize);
                counts[i] += 1;
                weights[i] += 1.0 - (rho - rb as f64).abs() / (radius + 1.0);
            }
        }
    }

    let mut peaks = Vec::new();
    for t in 0..space.n_theta {
        for r in 0..space.n_rho {
            let here = space.index(t, r);
            let v = counts[here];
            if (v as usize) < params.min_votes {
                continue;
            }
            let w = weights[here];
            let mut is_peak = true;
            'nbr: for dt in -1..=1 {
                for dr in -1..=1 {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    if let Some((nt, nr)) = space.neighbor(t, r, dt, dr) {
                        let there = space.index(nt, nr);
                        let (nv, nw) = (counts[there], weights[there]);
                        // Plateaus keep only their first bin in scan order.
                        if (nv, nw) > (v, w) || ((nv, nw) == (v, w) && there < here) {
                            is_peak = false;
                            break 'nbr;
                        }
                    }
                }
            }
            if is_peak {
                peaks.push((v, w, here, t, r));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    Ok(peaks
        .into_iter()
        .map(|(_, _, _, t, r)| {
            let theta = t as f64 * params.theta_step;
            let rho = (r as isize - rho_offset) as f64 * params.rho_step;
            ImageLine::from_hough(rho / grid.scale, theta)
        })
        .collect())
}
