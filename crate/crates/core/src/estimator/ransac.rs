//! Hypothesize-and-verify machinery shared by the separable estimator and the
//! RANSAC / LMEDS baselines.

use rand_chacha::ChaCha8Rng;

use crate::correspondence::{Correspondence, CorrespondenceSet};
use crate::error::{invalid, Error, Result};
use crate::estimator::budget::iteration_budget;
use crate::estimator::config::{EstimatorConfig, InlierRatio, Variant};
use crate::estimator::report::{EstimateReport, Method, ResidualStats};
use crate::estimator::rng_stream;
use crate::geometry::{sed_pixels, FundamentalMatrix};
use crate::solvers::{eight_point, seven_point};

/// Inliers of one model and the distances that decided them.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Score {
    pub inliers: Vec<usize>,
    pub mean_sed: f64,
}

impl Score {
    pub fn count(&self) -> usize {
        self.inliers.len()
    }

    /// More inliers wins; equal counts prefer the lower mean distance.
    pub fn beats(&self, other: &Score) -> bool {
        self.count() > other.count() || (self.count() == other.count() && self.mean_sed < other.mean_sed)
    }
}

pub(crate) fn sed_all(f: &FundamentalMatrix, corrs: &CorrespondenceSet, cfg: &EstimatorConfig) -> Vec<f64> {
    corrs
        .pairs()
        .iter()
        .map(|c| sed_pixels(f.matrix(), c.x, c.xp, cfg.sed_kind).unwrap_or(f64::INFINITY))
        .collect()
}

pub(crate) fn score(f: &FundamentalMatrix, corrs: &CorrespondenceSet, cfg: &EstimatorConfig) -> Score {
    let threshold = cfg.sed_threshold();
    let mut inliers = Vec::new();
    let mut sum = 0.0;
    for (i, d) in sed_all(f, corrs, cfg).into_iter().enumerate() {
        if d <= threshold {
            inliers.push(i);
            sum += d;
        }
    }
    let mean_sed = if inliers.is_empty() { f64::INFINITY } else { sum / inliers.len() as f64 };
    Score { inliers, mean_sed }
}

pub(crate) fn residual_stats(f: &FundamentalMatrix, corrs: &CorrespondenceSet, ids: &[usize], cfg: &EstimatorConfig) -> ResidualStats {
    let mut d: Vec<f64> = ids
        .iter()
        .map(|&i| {
            let c = &corrs.pairs()[i];
            sed_pixels(f.matrix(), c.x, c.xp, cfg.sed_kind).unwrap_or(f64::INFINITY)
        })
        .collect();
    if d.is_empty() {
        return ResidualStats::default();
    }
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    ResidualStats { mean, median: median(&mut d) }
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn solve(variant: Variant, sample: &[Correspondence]) -> Result<Vec<FundamentalMatrix>> {
    match variant {
        Variant::SevenPoint => seven_point(sample),
        Variant::EightPoint => eight_point(sample).map(|f| vec![f]),
    }
}

/// Result of a sampling loop.
#[derive(Debug, Clone)]
pub(crate) struct Search {
    pub best: Option<(FundamentalMatrix, Score)>,
    pub samples: u64,
    pub evaluations: u64,
    pub saturated: bool,
}

/// Budget for a sample size under the configured inlier-ratio mode, given
/// the best inlier fraction observed so far.
pub(crate) fn budget_for(k: usize, cfg: &EstimatorConfig, observed_inlier_fraction: Option<f64>) -> Result<(u64, bool)> {
    let ratio = match (cfg.inlier_ratio, observed_inlier_fraction) {
        (InlierRatio::Fixed(r), _) => r,
        (InlierRatio::Adaptive, Some(w)) => w,
        (InlierRatio::Adaptive, None) => return Ok((cfg.max_iterations, false)),
    };
    if ratio <= 0.0 {
        return Ok((cfg.max_iterations, true));
    }
    let b = iteration_budget(k, (1.0 - ratio).clamp(0.0, 1.0 - 1e-12), cfg.confidence, cfg.max_iterations)?;
    Ok((b.count, b.saturated))
}

/// Draws `sample_size` ids from `pool` per iteration, prepends `fixed`, solves
/// with `variant` and scores every candidate against all correspondences.
/// With `polish`, every new best model is refit on its inliers before it is
/// stored.
#[allow(clippy::too_many_arguments)]
pub(crate) fn hypothesize_and_verify(
    corrs: &CorrespondenceSet,
    fixed: &[usize],
    pool: &[usize],
    sample_size: usize,
    variant: Variant,
    cfg: &EstimatorConfig,
    polish: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Search> {
    if pool.len() < sample_size {
        return Err(invalid(format!(
            "sampling pool has {} correspondences, need {sample_size}",
            pool.len()
        )));
    }
    let n = corrs.len() as f64;
    let (mut budget, mut saturated) = budget_for(sample_size, cfg, None)?;
    let mut search = Search { best: None, samples: 0, evaluations: 0, saturated: false };
    let mut minimal: Vec<Correspondence> = fixed.iter().map(|&i| corrs.pairs()[i]).collect();
    while search.samples < budget {
        search.samples += 1;
        minimal.truncate(fixed.len());
        for k in rand::seq::index::sample(rng, pool.len(), sample_size) {
            minimal.push(corrs.pairs()[pool[k]]);
        }
        // Degenerate samples consume an iteration without an evaluation.
        let Ok(candidates) = solve(variant, &minimal) else { continue };
        for f in candidates {
            search.evaluations += 1;
            let s = score(&f, corrs, cfg);
            let improved = match &search.best {
                None => true,
                Some((_, b)) => s.beats(b),
            };
            if improved {
                let (f, s) = if polish { refit(corrs, f, s, cfg) } else { (f, s) };
                if cfg.inlier_ratio == InlierRatio::Adaptive {
                    let (b, sat) = budget_for(sample_size, cfg, Some(s.count() as f64 / n))?;
                    budget = budget.min(b);
                    saturated = sat;
                }
                search.best = Some((f, s));
            }
        }
    }
    search.saturated = saturated;
    Ok(search)
}

/// Most 8-point refits on the inliers before giving up on convergence.
const MAX_REFITS: usize = 10;

/// Re-estimates with the 8-point solver on all inliers and relabels, repeating
/// while the inlier set improves. The original model is kept unless a refit
/// scores at least as well.
pub(crate) fn refit(
    corrs: &CorrespondenceSet,
    f: FundamentalMatrix,
    s: Score,
    cfg: &EstimatorConfig,
) -> (FundamentalMatrix, Score) {
    if !cfg.refit_on_inliers {
        return (f, s);
    }
    let (mut f, mut s) = (f, s);
    for round in 0..MAX_REFITS {
        if s.count() < 8 {
            break;
        }
        let pts: Vec<_> = s.inliers.iter().map(|&i| corrs.pairs()[i]).collect();
        let Ok(g) = eight_point(&pts) else { break };
        let gs = score(&g, corrs, cfg);
        let accept = if round == 0 {
            gs.count() > s.count() || (gs.count() == s.count() && gs.mean_sed <= s.mean_sed)
        } else {
            gs.beats(&s)
        };
        if !accept {
            break;
        }
        let same = gs.inliers == s.inliers;
        (f, s) = (g, gs);
        if same {
            break;
        }
    }
    (f, s)
}

/// Classic RANSAC with the 7- or 8-point solver.
pub fn estimate_ransac(corrs: &CorrespondenceSet, cfg: &EstimatorConfig, solver: Variant) -> Result<EstimateReport> {
    cfg.validate()?;
    let mut rng = rng_stream(cfg.seed, 4);
    ransac_with(corrs, cfg, solver, Method::Ransac, &mut rng)
}

pub(crate) fn ransac_with(
    corrs: &CorrespondenceSet,
    cfg: &EstimatorConfig,
    solver: Variant,
    method: Method,
    rng: &mut ChaCha8Rng,
) -> Result<EstimateReport> {
    let k = solver.minimal_size();
    if corrs.len() < k {
        return Err(invalid(format!("need at least {k} correspondences, got {}", corrs.len())));
    }
    let pool: Vec<usize> = (0..corrs.len()).collect();
    let search = hypothesize_and_verify(corrs, &[], &pool, k, solver, cfg, false, rng)?;
    let Some((f, s)) = search.best else {
        return Err(Error::EstimationFailure {
            reason: format!("all {} samples were degenerate", search.samples),
            report: None,
        });
    };
    let (f, s) = refit(corrs, f, s, cfg);
    Ok(EstimateReport {
        residual_stats: residual_stats(&f, corrs, &s.inliers, cfg),
        f,
        inlier_indices: s.inliers,
        method_used: method,
        hypothesis_evaluations: search.evaluations,
        samples_drawn: search.samples,
        step1: None,
        low_confidence: false,
        budget_saturated: search.saturated,
        line_matching_time: None,
    })
}

/// Robust scale factor with the small-sample correction.
fn lmeds_sigma(median_sq: f64, n: usize, k: usize) -> f64 {
    let dof = n.saturating_sub(k).max(1) as f64;
    1.4826 * (1.0 + 5.0 / dof) * median_sq.sqrt()
}

fn median_sq(f: &FundamentalMatrix, corrs: &CorrespondenceSet, cfg: &EstimatorConfig) -> f64 {
    let mut d: Vec<f64> = sed_all(f, corrs, cfg).into_iter().map(|v| v * v).collect();
    median(&mut d)
}

fn lmeds_inliers(f: &FundamentalMatrix, corrs: &CorrespondenceSet, cfg: &EstimatorConfig, k: usize) -> Score {
    let sigma = lmeds_sigma(median_sq(f, corrs, cfg), corrs.len(), k);
    // Exact fits have sigma = 0; keep a floor so they still count.
    let threshold = (2.5 * sigma).max(1e-6).min(cfg.sed_threshold());
    let mut inliers = Vec::new();
    let mut sum = 0.0;
    for (i, d) in sed_all(f, corrs, cfg).into_iter().enumerate() {
        if d <= threshold {
            inliers.push(i);
            sum += d;
        }
    }
    let mean_sed = if inliers.is_empty() { f64::INFINITY } else { sum / inliers.len() as f64 };
    Score { inliers, mean_sed }
}

/// Least median of squares: the model with the smallest median squared
/// distance wins; inliers are labeled at 2.5 robust standard deviations.
/// Results are unreliable beyond 50% outliers, flagged as `low_confidence`.
pub fn estimate_lmeds(corrs: &CorrespondenceSet, cfg: &EstimatorConfig, solver: Variant) -> Result<EstimateReport> {
    cfg.validate()?;
    let k = solver.minimal_size();
    if corrs.len() < k {
        return Err(invalid(format!("need at least {k} correspondences, got {}", corrs.len())));
    }
    let mut rng = rng_stream(cfg.seed, 5);
    // LMEDS never counts inliers while sampling, so the adaptive mode sizes
    // the budget at its 50% breakdown point.
    let sizing = match cfg.inlier_ratio {
        InlierRatio::Adaptive => EstimatorConfig { inlier_ratio: InlierRatio::Fixed(0.5), ..cfg.clone() },
        InlierRatio::Fixed(_) => cfg.clone(),
    };
    let (budget, saturated) = budget_for(k, &sizing, None)?;
    let mut best: Option<(FundamentalMatrix, f64)> = None;
    let (mut samples, mut evaluations) = (0u64, 0u64);
    let mut sample = Vec::with_capacity(k);
    while samples < budget {
        samples += 1;
        sample.clear();
        sample.extend(rand::seq::index::sample(&mut rng, corrs.len(), k).into_iter().map(|i| corrs.pairs()[i]));
        let Ok(candidates) = solve(solver, &sample) else { continue };
        for f in candidates {
            evaluations += 1;
            let m = median_sq(&f, corrs, cfg);
            if best.as_ref().is_none_or(|(_, b)| m < *b) {
                best = Some((f, m));
            }
        }
    }
    let Some((f, m)) = best else {
        return Err(Error::EstimationFailure {
            reason: format!("all {samples} samples were degenerate"),
            report: None,
        });
    };
    let mut f = f;
    let mut s = lmeds_inliers(&f, corrs, cfg, k);
    if cfg.refit_on_inliers && s.count() >= 8 {
        let pts: Vec<_> = s.inliers.iter().map(|&i| corrs.pairs()[i]).collect();
        if let Ok(g) = eight_point(&pts) {
            if median_sq(&g, corrs, cfg) <= m {
                f = g;
                s = lmeds_inliers(&f, corrs, cfg, k);
            }
        }
    }
    Ok(EstimateReport {
        residual_stats: residual_stats(&f, corrs, &s.inliers, cfg),
        low_confidence: 2 * s.count() < corrs.len(),
        f,
        inlier_indices: s.inliers,
        method_used: Method::Lmeds,
        hypothesis_evaluations: evaluations,
        samples_drawn: samples,
        step1: None,
        budget_saturated: saturated,
        line_matching_time: None,
    })
}
