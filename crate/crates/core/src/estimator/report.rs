use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geometry::FundamentalMatrix;
use crate::lines::LineMatch;
use crate::solvers::{ControlPointPair, EpipolarHomography1D};

/// Which estimation path produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "separable")]
    Separable,
    #[serde(rename = "fallback-8pt")]
    FallbackEightPoint,
    #[serde(rename = "ransac")]
    Ransac,
    #[serde(rename = "lmeds")]
    Lmeds,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Separable => "separable",
            Method::FallbackEightPoint => "fallback-8pt",
            Method::Ransac => "ransac",
            Method::Lmeds => "lmeds",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// What step one settled on: the matched lines, their control points, the
/// epipolar homography and the three anchor correspondences.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOneSummary {
    pub homography: EpipolarHomography1D,
    pub line_match: LineMatch,
    pub control_points: ControlPointPair,
    pub anchor_indices: [usize; 3],
    /// Line members whose transfer error is within `t1`.
    pub line_inliers: Vec<usize>,
    pub orientation_swapped: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub f: FundamentalMatrix,
    /// Ascending correspondence ids.
    pub inlier_indices: Vec<usize>,
    pub method_used: Method,
    /// Models scored against the data; a 7-point sample can add up to three.
    pub hypothesis_evaluations: u64,
    /// Minimal samples drawn across every stage, degenerate ones included.
    pub samples_drawn: u64,
    pub step1: Option<StepOneSummary>,
    /// Symmetric epipolar distance over the inliers.
    pub residual_stats: ResidualStats,
    /// LMEDS ran with fewer than half the points as inliers.
    pub low_confidence: bool,
    /// Some budget was clipped by `max_iterations`.
    pub budget_saturated: bool,
    /// Wall time of line matching; never serialized.
    pub line_matching_time: Option<Duration>,
}

impl EstimateReport {
    pub fn inlier_count(&self) -> usize {
        self.inlier_indices.len()
    }
}
