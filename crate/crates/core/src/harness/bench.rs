//! Benchmark grids over synthetic scenes and iteration-count curves.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{invalid, Error, Result};
use crate::estimator::{
    estimate_lmeds, estimate_ransac, estimate_separable, ransac_iterations, EstimateReport, EstimatorConfig,
    InlierRatio, Method, Variant,
};
use crate::harness::metrics::{evaluate, MetricsReport};
use crate::harness::synth::{generate_scene, SyntheticSceneSpec};
use crate::lines::HoughParams;

/// Estimation method selectable from the CLI and in grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMethod {
    Separable,
    Ransac7,
    Ransac8,
    Lmeds,
}

impl BenchMethod {
    pub fn label(self) -> &'static str {
        match self {
            BenchMethod::Separable => "separable",
            BenchMethod::Ransac7 => "ransac7",
            BenchMethod::Ransac8 => "ransac8",
            BenchMethod::Lmeds => "lmeds",
        }
    }
}

impl std::str::FromStr for BenchMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "separable" => Ok(BenchMethod::Separable),
            "ransac7" => Ok(BenchMethod::Ransac7),
            "ransac8" => Ok(BenchMethod::Ransac8),
            "lmeds" => Ok(BenchMethod::Lmeds),
            _ => Err(format!("unknown method {s:?}; expected separable, ransac7, ransac8 or lmeds")),
        }
    }
}

/// Runs one method on a correspondence set.
pub fn run_method(
    method: BenchMethod,
    corrs: &CorrespondenceSet,
    cfg: &EstimatorConfig,
    hough: &HoughParams,
) -> Result<EstimateReport> {
    match method {
        BenchMethod::Separable => estimate_separable(corrs, cfg, hough),
        BenchMethod::Ransac7 => estimate_ransac(corrs, cfg, Variant::SevenPoint),
        BenchMethod::Ransac8 => estimate_ransac(corrs, cfg, Variant::EightPoint),
        BenchMethod::Lmeds => estimate_lmeds(corrs, cfg, cfg.variant),
    }
}

/// A grid: every method at every outlier rate, `trials` scenes each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchGrid {
    pub trials: usize,
    pub methods: Vec<BenchMethod>,
    pub outlier_rates: Vec<f64>,
    pub scene: SyntheticSceneSpec,
    pub config: EstimatorConfig,
    pub hough: HoughParams,
    /// Size budgets from the true inlier ratio of each cell instead of
    /// `config.inlier_ratio`.
    pub ratio_from_rate: bool,
}

impl Default for BenchGrid {
    fn default() -> Self {
        Self {
            trials: 20,
            methods: vec![BenchMethod::Separable, BenchMethod::Ransac7],
            outlier_rates: vec![0.3, 0.5, 0.6],
            scene: SyntheticSceneSpec { noise_sigma: 0.5, ..Default::default() },
            config: EstimatorConfig::default(),
            hough: HoughParams::default(),
            ratio_from_rate: true,
        }
    }
}

/// One cell of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub method: BenchMethod,
    pub scene: SyntheticSceneSpec,
    pub config: EstimatorConfig,
    pub hough: HoughParams,
    pub trials: usize,
}

impl BenchGrid {
    pub fn cells(&self) -> Vec<BenchCell> {
        let mut out = Vec::new();
        for &rate in &self.outlier_rates {
            for &method in &self.methods {
                let mut config = self.config.clone();
                if self.ratio_from_rate {
                    config.inlier_ratio = InlierRatio::Fixed(1.0 - rate);
                }
                out.push(BenchCell {
                    method,
                    scene: SyntheticSceneSpec { outlier_rate: rate, ..self.scene.clone() },
                    config,
                    hough: self.hough.clone(),
                    trials: self.trials,
                });
            }
        }
        out
    }
}

/// Outcome of one trial. Trial `i` uses scene seed `scene.seed + i` and
/// estimator seed `config.seed + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub success: bool,
    pub method_used: Option<Method>,
    pub samples_drawn: u64,
    pub hypothesis_evaluations: u64,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

/// A trial succeeds when estimation returns a model and at least
/// `min_success_inliers` of its inliers are true positives. Generation and
/// estimation errors are recorded, never propagated.
pub fn run_trial(cell: &BenchCell, trial: usize) -> TrialResult {
    let scene = SyntheticSceneSpec { seed: cell.scene.seed.wrapping_add(trial as u64), ..cell.scene.clone() };
    let cfg = EstimatorConfig { seed: cell.config.seed.wrapping_add(trial as u64), ..cell.config.clone() };
    let failed = |e: String| TrialResult {
        trial,
        success: false,
        method_used: None,
        samples_drawn: 0,
        hypothesis_evaluations: 0,
        metrics: None,
        error: Some(e),
    };
    let (corrs, gt) = match generate_scene(&scene) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let (report, error) = match run_method(cell.method, &corrs, &cfg, &cell.hough) {
        Ok(r) => (r, None),
        Err(Error::EstimationFailure { reason, report: Some(r) }) => (*r, Some(reason)),
        Err(e) => return failed(e.to_string()),
    };
    let metrics = match evaluate(&report, &gt, &corrs) {
        Ok(m) => m,
        Err(e) => return failed(e.to_string()),
    };
    TrialResult {
        trial,
        success: error.is_none() && metrics.true_positives >= cfg.min_success_inliers,
        method_used: Some(report.method_used),
        samples_drawn: report.samples_drawn,
        hypothesis_evaluations: report.hypothesis_evaluations,
        metrics: Some(metrics),
        error,
    }
}

/// One CSV row per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: String,
    pub outlier_rate: f64,
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub fallbacks: usize,
    pub mean_samples: f64,
    pub mean_evaluations: f64,
    /// Accuracy means over successful trials.
    pub mean_pct_inliers: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f_score: f64,
    pub mean_sed: f64,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

pub fn summarize(cell: &BenchCell, results: &[TrialResult]) -> CellSummary {
    let successes = results.iter().filter(|r| r.success).count();
    let ok: Vec<MetricsReport> = results.iter().filter(|r| r.success).filter_map(|r| r.metrics).collect();
    CellSummary {
        method: cell.method.label().to_string(),
        outlier_rate: cell.scene.outlier_rate,
        trials: results.len(),
        successes,
        failures: results.len() - successes,
        failure_rate: if results.is_empty() { 0.0 } else { (results.len() - successes) as f64 / results.len() as f64 },
        fallbacks: results.iter().filter(|r| r.method_used == Some(Method::FallbackEightPoint)).count(),
        mean_samples: mean(results.iter().map(|r| r.samples_drawn as f64)),
        mean_evaluations: mean(results.iter().map(|r| r.hypothesis_evaluations as f64)),
        mean_pct_inliers: mean(ok.iter().map(|m| m.pct_inliers)),
        mean_precision: mean(ok.iter().map(|m| m.precision)),
        mean_recall: mean(ok.iter().map(|m| m.recall)),
        mean_f_score: mean(ok.iter().map(|m| m.f_score)),
        mean_sed: mean(ok.iter().map(|m| m.mean_sed)),
    }
}

/// Runs every cell; trials run in parallel and are returned in order.
pub fn run_benchmark(grid: &BenchGrid) -> Result<Vec<(BenchCell, Vec<TrialResult>)>> {
    if grid.trials == 0 || grid.methods.is_empty() || grid.outlier_rates.is_empty() {
        return Err(invalid("grid needs trials, methods and outlier rates"));
    }
    grid.config.validate()?;
    grid.hough.validate()?;
    Ok(grid
        .cells()
        .into_iter()
        .map(|cell| {
            let results = (0..cell.trials).into_par_iter().map(|t| run_trial(&cell, t)).collect();
            (cell, results)
        })
        .collect())
}

pub fn write_csv<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Closed-form sample budgets at one outlier rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub outlier_rate: f64,
    pub ransac7: u64,
    pub ransac8: u64,
    /// Three-point homography stage plus the four-point completion.
    pub separable7: u64,
    pub separable8: u64,
    pub ratio7: f64,
    pub ratio8: f64,
}

pub fn iteration_curves(rates: &[f64], confidence: f64) -> Result<Vec<CurveRow>> {
    rates
        .iter()
        .map(|&r| {
            let f = |k| ransac_iterations(k, r, confidence);
            let (r7, r8) = (f(7)?, f(8)?);
            let (s7, s8) = (f(3)? + f(4)?, f(3)? + f(5)?);
            Ok(CurveRow {
                outlier_rate: r,
                ransac7: r7,
                ransac8: r8,
                separable7: s7,
                separable8: s8,
                ratio7: s7 as f64 / r7 as f64,
                ratio8: s8 as f64 / r8 as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_match_closed_form() {
        let rows = iteration_curves(&[0.5, 0.6], 0.99).unwrap();
        assert_eq!((rows[0].ransac7, rows[0].separable7), (588, 35 + 72));
        assert_eq!((rows[1].ransac7, rows[1].separable7), (2809, 70 + 178));
    }

    #[test]
    fn trial_counts_add_up() {
        let grid = BenchGrid {
            trials: 3,
            methods: vec![BenchMethod::Separable, BenchMethod::Ransac8],
            outlier_rates: vec![0.3],
            ..Default::default()
        };
        let out = run_benchmark(&grid).unwrap();
        assert_eq!(out.len(), 2);
        for (cell, results) in &out {
            let s = summarize(cell, results);
            assert_eq!(s.successes + s.failures, 3);
        }
    }
}
