//! Fundamental matrix estimation that exploits a pair of matched image
//! lines.
//!
//! When some putative correspondences are colinear in both images, the
//! epipolar geometry separates into a 1D projective map between the two
//! lines (three degrees of freedom) and the two epipoles. The separable
//! estimator finds the line pair with a Hough transform, fits the 1D map with
//! a three-point RANSAC over the line members, then completes the
//! fundamental matrix from the three anchors plus a few more points. Both
//! stages need far fewer samples than a seven- or eight-point RANSAC.
//!
//! ```
//! use sepfour::estimator::{estimate_separable, EstimatorConfig, InlierRatio};
//! use sepfour::harness::synth::{generate_scene, SyntheticSceneSpec};
//! use sepfour::lines::HoughParams;
//!
//! let spec = SyntheticSceneSpec { n_points: 150, n_on_line: 20, outlier_rate: 0.3, seed: 7, ..Default::default() };
//! let (corrs, _truth) = generate_scene(&spec).unwrap();
//! let cfg = EstimatorConfig { inlier_ratio: InlierRatio::Fixed(0.7), ..Default::default() };
//! let report = estimate_separable(&corrs, &cfg, &HoughParams::default()).unwrap();
//! assert!(report.inlier_count() >= 100);
//! ```

pub mod correspondence;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
mod linalg;
pub mod lines;
pub mod solvers;

pub use error::{Error, Result};
