//! Accuracy of an estimate against synthetic ground truth.

use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{invalid, Result};
use crate::estimator::EstimateReport;
use crate::geometry::{sed_pixels, FundamentalMatrix, SedKind};
use crate::harness::synth::GroundTruth;

/// Pixel distance under the true geometry below which a pair counts as a
/// positive.
pub const POSITIVE_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percentage of all correspondences returned as inliers.
    pub pct_inliers: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// Mean symmetric epipolar distance of the returned inliers under the
    /// estimated fundamental matrix.
    pub mean_sed: f64,
    /// Returned inliers that are positives.
    pub true_positives: usize,
    pub positives: usize,
}

/// Mean symmetric epipolar distance of every correspondence under `f`.
pub fn gt_distances(corrs: &CorrespondenceSet, f: &FundamentalMatrix) -> Vec<f64> {
    corrs
        .pairs()
        .iter()
        .map(|c| sed_pixels(f.matrix(), c.x, c.xp, SedKind::Mean).unwrap_or(f64::INFINITY))
        .collect()
}

/// Scores an estimate against ground truth.
pub fn evaluate(report: &EstimateReport, gt: &GroundTruth, corrs: &CorrespondenceSet) -> Result<MetricsReport> {
    evaluate_parts(&report.f, &report.inlier_indices, gt, corrs)
}

/// [`evaluate`] from a model and its inlier ids. Precision is 1 for an empty
/// set.
pub fn evaluate_parts(
    f: &FundamentalMatrix,
    inliers: &[usize],
    gt: &GroundTruth,
    corrs: &CorrespondenceSet,
) -> Result<MetricsReport> {
    if gt.inlier_mask.len() != corrs.len() {
        return Err(invalid("ground truth does not match the correspondence set"));
    }
    if inliers.iter().any(|&i| i >= corrs.len()) {
        return Err(invalid("inlier id out of range"));
    }
    let d = gt_distances(corrs, &gt.f_gt);
    let positive: Vec<bool> = d.iter().map(|&v| v < POSITIVE_THRESHOLD).collect();
    let positives = positive.iter().filter(|&&p| p).count();
    let tp = inliers.iter().filter(|&&i| positive[i]).count();
    let precision = if inliers.is_empty() { 1.0 } else { tp as f64 / inliers.len() as f64 };
    let recall = if positives == 0 { 1.0 } else { tp as f64 / positives as f64 };
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let mean_sed = if inliers.is_empty() {
        0.0
    } else {
        let est = gt_distances(corrs, f);
        inliers.iter().map(|&i| est[i]).sum::<f64>() / inliers.len() as f64
    };
    Ok(MetricsReport {
        pct_inliers: 100.0 * inliers.len() as f64 / corrs.len() as f64,
        precision,
        recall,
        f_score,
        mean_sed,
        true_positives: tp,
        positives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{generate_scene, SyntheticSceneSpec};

    #[test]
    fn perfect_selection_scores_one() {
        let spec = SyntheticSceneSpec { outlier_rate: 0.4, seed: 3, ..Default::default() };
        let (set, gt) = generate_scene(&spec).unwrap();
        let ids: Vec<usize> = (0..set.len()).filter(|&i| gt.inlier_mask[i]).collect();
        let m = evaluate_parts(&gt.f_gt, &ids, &gt, &set).unwrap();
        assert_eq!(m.precision, 1.0);
        // Random outliers can land on their epipolar line by chance.
        assert!(m.recall > 0.95);
        assert!((m.pct_inliers - 60.0).abs() < 1e-9);
        assert!(m.mean_sed < 1e-9);
    }

    #[test]
    fn noise_free_truth_has_full_recall() {
        let spec = SyntheticSceneSpec { seed: 8, ..Default::default() };
        let (set, gt) = generate_scene(&spec).unwrap();
        let all: Vec<usize> = (0..set.len()).collect();
        let m = evaluate_parts(&gt.f_gt, &all, &gt, &set).unwrap();
        assert_eq!((m.recall, m.f_score), (1.0, 1.0));
        assert!(m.mean_sed <= 1e-9);
    }

    #[test]
    fn empty_selection() {
        let (set, gt) = generate_scene(&SyntheticSceneSpec::default()).unwrap();
        let m = evaluate_parts(&gt.f_gt, &[], &gt, &set).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f_score, 0.0);
        assert_eq!(m.pct_inliers, 0.0);
    }
}
