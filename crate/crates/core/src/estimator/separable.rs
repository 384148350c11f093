//! Two-step estimation: the epipolar homography from three correspondences on
//! a matched line pair, then the remaining four (or five) correspondences.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use crate::correspondence::{CorrespondenceSet, ImageSize};
use crate::error::{invalid, Error, Result};
use crate::estimator::config::{EstimatorConfig, FallbackBasis, InlierRatio, Variant};
use crate::estimator::ransac::{budget_for, hypothesize_and_verify, ransac_with, refit, residual_stats, Score};
use crate::estimator::report::{EstimateReport, Method, StepOneSummary};
use crate::estimator::rng_stream;
use crate::geometry::{FundamentalMatrix, HomogeneousPoint, ImageLine};
use crate::lines::{find_line_match, HoughParams, LineMatch, MIN_LINE_SUPPORT};
use crate::solvers::{
    apply_homography_1d, coefficients_within, homography_1d_from_3, ControlPointPair, EpipolarHomography1D,
    LineCoefficients,
};

/// The two points where a line crosses the border of `[0, w] x [0, h]`,
/// ordered by x then y.
pub fn border_points(line: &ImageLine, size: ImageSize) -> Option<(HomogeneousPoint, HomogeneousPoint)> {
    let l = line.coeffs();
    let (w, h) = (size.width, size.height);
    let eps = 1e-9 * w.max(h);
    let mut hits: Vec<(f64, f64)> = Vec::with_capacity(4);
    if l.y.abs() > 1e-15 {
        for x in [0.0, w] {
            hits.push((x, -(l.x * x + l.z) / l.y));
        }
    }
    if l.x.abs() > 1e-15 {
        for y in [0.0, h] {
            hits.push((-(l.y * y + l.z) / l.x, y));
        }
    }
    hits.retain(|&(x, y)| (-eps..=w + eps).contains(&x) && (-eps..=h + eps).contains(&y));
    let mut best: Option<((f64, f64), (f64, f64), f64)> = None;
    for i in 0..hits.len() {
        for j in (i + 1)..hits.len() {
            let d = (hits[i].0 - hits[j].0).hypot(hits[i].1 - hits[j].1);
            if best.is_none_or(|b| d > b.2) {
                best = Some((hits[i], hits[j], d));
            }
        }
    }
    let (a, b, d) = best?;
    if d <= eps {
        return None;
    }
    let (a, b) = if (a.0, a.1) <= (b.0, b.1) { (a, b) } else { (b, a) };
    Some((HomogeneousPoint::from_pixel(a.0, a.1), HomogeneousPoint::from_pixel(b.0, b.1)))
}

/// Control points at the image-border crossings of both matched lines.
pub fn control_points(m: &LineMatch, size1: ImageSize, size2: ImageSize) -> Result<ControlPointPair> {
    let (x1, x2) = border_points(&m.line1, size1).ok_or_else(|| invalid("first line misses the image"))?;
    let (x1p, x2p) = border_points(&m.line2, size2).ok_or_else(|| invalid("second line misses the image"))?;
    ControlPointPair::new(x1, x2, x1p, x2p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOneOutcome {
    pub homography: EpipolarHomography1D,
    pub control_points: ControlPointPair,
    pub anchor_indices: [usize; 3],
    pub line_inliers: Vec<usize>,
    pub orientation_swapped: bool,
    pub samples_drawn: u64,
    pub hypothesis_evaluations: u64,
}

/// Step one failed in both control-point orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOneFailure {
    pub reason: String,
    pub samples_drawn: u64,
    pub hypothesis_evaluations: u64,
}

impl From<StepOneFailure> for Error {
    fn from(f: StepOneFailure) -> Self {
        Error::StepOneFailure(f.reason)
    }
}

struct Member {
    id: usize,
    src: LineCoefficients,
    dst: LineCoefficients,
    target: (f64, f64),
}

/// Transfer error of one member under `h`: distance between the measured
/// `x'` and the point reconstructed on the second line.
fn transfer_error(h: &EpipolarHomography1D, cps: &ControlPointPair, m: &Member) -> f64 {
    let Ok(c) = apply_homography_1d(h, &m.src) else { return f64::INFINITY };
    let p = c.point(&cps.x1p, &cps.x2p);
    if p.z.abs() <= 1e-12 * p.norm() {
        return f64::INFINITY;
    }
    (p.x / p.z - m.target.0).hypot(p.y / p.z - m.target.1)
}

struct Attempt {
    best: Option<(EpipolarHomography1D, [usize; 3], Vec<usize>, f64)>,
    samples: u64,
    evaluations: u64,
}

fn homography_ransac(members: &[Member], cps: &ControlPointPair, cfg: &EstimatorConfig, rng: &mut ChaCha8Rng) -> Result<Attempt> {
    let (mut budget, _) = budget_for(3, cfg, None)?;
    let mut out = Attempt { best: None, samples: 0, evaluations: 0 };
    while out.samples < budget {
        out.samples += 1;
        let pick = rand::seq::index::sample(rng, members.len(), 3).into_vec();
        let pairs = [0, 1, 2].map(|k| (members[pick[k]].src, members[pick[k]].dst));
        let Ok(h) = homography_1d_from_3(&pairs) else { continue };
        out.evaluations += 1;
        let mut inliers = Vec::new();
        let mut sum = 0.0;
        for m in members {
            let e = transfer_error(&h, cps, m);
            if e <= cfg.t1 {
                inliers.push(m.id);
                sum += e;
            }
        }
        let mean = if inliers.is_empty() { f64::INFINITY } else { sum / inliers.len() as f64 };
        let better = match &out.best {
            None => true,
            Some((_, _, bi, bm)) => inliers.len() > bi.len() || (inliers.len() == bi.len() && mean < *bm),
        };
        if better {
            if cfg.inlier_ratio == InlierRatio::Adaptive {
                let w = inliers.len() as f64 / members.len() as f64;
                budget = budget.min(budget_for(3, cfg, Some(w))?.0);
            }
            let anchors = [0, 1, 2].map(|k| members[pick[k]].id);
            out.best = Some((h, anchors, inliers, mean));
        }
    }
    Ok(out)
}

/// Step one: RANSAC over triples of line members for the epipolar homography.
///
/// Members are expressed in the control points at the image-border crossings
/// of each line. A member is an inlier when its transferred position lies
/// within `t1` pixels of the measured one, and a hypothesis succeeds with at
/// least four inliers. The second orientation of the image-2 control points is
/// tried only when the first fails.
pub fn step_one(
    m: &LineMatch,
    corrs: &CorrespondenceSet,
    cfg: &EstimatorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StepOneOutcome, StepOneFailure> {
    let fail = |reason: String, samples, evaluations| StepOneFailure { reason, samples_drawn: samples, hypothesis_evaluations: evaluations };
    if m.member_indices.len() < MIN_LINE_SUPPORT {
        return Err(fail(format!("line match has {} members", m.member_indices.len()), 0, 0));
    }
    let first = control_points(m, corrs.size1(), corrs.size2()).map_err(|e| fail(e.to_string(), 0, 0))?;
    let (mut samples, mut evaluations) = (0, 0);
    for (swapped, cps) in [(false, first), (true, first.with_swapped_second())] {
        let members: Vec<Member> = m
            .member_indices
            .iter()
            .filter_map(|&id| {
                let c = &corrs.pairs()[id];
                let src = coefficients_within(&c.first(), &cps.x1, &cps.x2, f64::INFINITY).ok()?;
                let dst = coefficients_within(&c.second(), &cps.x1p, &cps.x2p, f64::INFINITY).ok()?;
                Some(Member { id, src, dst, target: c.xp })
            })
            .collect();
        if members.len() < MIN_LINE_SUPPORT {
            return Err(fail("too few members with valid coefficients".into(), samples, evaluations));
        }
        let attempt = homography_ransac(&members, &cps, cfg, rng).map_err(|e| fail(e.to_string(), samples, evaluations))?;
        samples += attempt.samples;
        evaluations += attempt.evaluations;
        if let Some((h, anchors, inliers, _)) = attempt.best {
            if inliers.len() >= MIN_LINE_SUPPORT {
                return Ok(StepOneOutcome {
                    homography: h,
                    control_points: cps,
                    anchor_indices: anchors,
                    line_inliers: inliers,
                    orientation_swapped: swapped,
                    samples_drawn: samples,
                    hypothesis_evaluations: evaluations,
                });
            }
        }
    }
    Err(fail("no homography reached four inliers in either orientation".into(), samples, evaluations))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTwoOutcome {
    pub f: FundamentalMatrix,
    /// Ascending ids with symmetric epipolar distance within `t2`.
    pub inliers: Vec<usize>,
    pub mean_sed: f64,
    pub samples_drawn: u64,
    pub hypothesis_evaluations: u64,
    pub budget_saturated: bool,
}

/// Step two: with the anchors fixed, sample four (7-point variant) or five
/// (8-point variant) more correspondences from everything else.
pub fn step_two(
    anchors: [usize; 3],
    corrs: &CorrespondenceSet,
    cfg: &EstimatorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StepTwoOutcome> {
    let extra = cfg.variant.minimal_size() - 3;
    let pool: Vec<usize> = (0..corrs.len()).filter(|i| !anchors.contains(i)).collect();
    let search = hypothesize_and_verify(corrs, &anchors, &pool, extra, cfg.variant, cfg, cfg.refit_on_inliers, rng)?;
    let Some((f, s)) = search.best else {
        return Err(Error::EstimationFailure {
            reason: format!("all {} completion samples were degenerate", search.samples),
            report: None,
        });
    };
    Ok(StepTwoOutcome {
        f,
        mean_sed: s.mean_sed,
        inliers: s.inliers,
        samples_drawn: search.samples,
        hypothesis_evaluations: search.evaluations,
        budget_saturated: search.saturated,
    })
}

/// Line matching, step one, step two and an optional refit, falling back to
/// 8-point RANSAC when any stage cannot deliver.
pub fn estimate_separable(corrs: &CorrespondenceSet, cfg: &EstimatorConfig, hough: &HoughParams) -> Result<EstimateReport> {
    cfg.validate()?;
    hough.validate()?;
    if corrs.len() < 8 {
        return Err(invalid(format!("need at least 8 correspondences, got {}", corrs.len())));
    }
    let mut spent = Spent::default();

    if let (FallbackBasis::Assumed, InlierRatio::Fixed(r)) = (cfg.fallback_basis, cfg.inlier_ratio) {
        if r < cfg.fallback_inlier_ratio {
            return fallback(corrs, cfg, spent);
        }
    }

    let started = Instant::now();
    let found = find_line_match(corrs, hough, cfg.seed)?;
    spent.line_matching_time = Some(started.elapsed());
    let Some(line_match) = found else {
        return fallback(corrs, cfg, spent);
    };

    let mut rng1 = rng_stream(cfg.seed, 2);
    let one = match step_one(&line_match, corrs, cfg, &mut rng1) {
        Ok(one) => one,
        Err(e) => {
            spent.samples += e.samples_drawn;
            spent.evaluations += e.hypothesis_evaluations;
            return fallback(corrs, cfg, spent);
        }
    };
    spent.samples += one.samples_drawn;
    spent.evaluations += one.hypothesis_evaluations;

    let mut rng2 = rng_stream(cfg.seed, 3);
    let two = match step_two(one.anchor_indices, corrs, cfg, &mut rng2) {
        Ok(two) => two,
        Err(Error::EstimationFailure { .. }) => return fallback(corrs, cfg, spent),
        Err(e) => return Err(e),
    };
    spent.samples += two.samples_drawn;
    spent.evaluations += two.hypothesis_evaluations;
    spent.saturated |= two.budget_saturated;

    let (f, s) = refit(corrs, two.f, Score { inliers: two.inliers, mean_sed: two.mean_sed }, cfg);
    let ratio = s.count() as f64 / corrs.len() as f64;
    if cfg.fallback_basis == FallbackBasis::Estimated && ratio < cfg.fallback_inlier_ratio {
        return fallback(corrs, cfg, spent);
    }
    if s.count() < cfg.min_success_inliers {
        return fallback(corrs, cfg, spent);
    }
    Ok(EstimateReport {
        residual_stats: residual_stats(&f, corrs, &s.inliers, cfg),
        f,
        inlier_indices: s.inliers,
        method_used: Method::Separable,
        hypothesis_evaluations: spent.evaluations,
        samples_drawn: spent.samples,
        step1: Some(StepOneSummary {
            homography: one.homography,
            line_match,
            control_points: one.control_points,
            anchor_indices: one.anchor_indices,
            line_inliers: one.line_inliers,
            orientation_swapped: one.orientation_swapped,
        }),
        low_confidence: false,
        budget_saturated: spent.saturated,
        line_matching_time: spent.line_matching_time,
    })
}

#[derive(Debug, Default)]
struct Spent {
    samples: u64,
    evaluations: u64,
    saturated: bool,
    line_matching_time: Option<std::time::Duration>,
}

fn fallback(corrs: &CorrespondenceSet, cfg: &EstimatorConfig, spent: Spent) -> Result<EstimateReport> {
    let mut rng = rng_stream(cfg.seed, 4);
    let mut report = ransac_with(corrs, cfg, Variant::EightPoint, Method::FallbackEightPoint, &mut rng)?;
    report.samples_drawn += spent.samples;
    report.hypothesis_evaluations += spent.evaluations;
    report.budget_saturated |= spent.saturated;
    report.line_matching_time = spent.line_matching_time;
    if report.inlier_count() < cfg.min_success_inliers {
        return Err(Error::EstimationFailure {
            reason: format!(
                "fallback found {} inliers, fewer than the required {}",
                report.inlier_count(),
                cfg.min_success_inliers
            ),
            report: Some(Box::new(report)),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn border_points_of_diagonal() {
        let l = ImageLine::new(Vector3::new(1.0, -1.0, 0.0)).unwrap();
        let (a, b) = border_points(&l, ImageSize::new(100.0, 50.0)).unwrap();
        assert_eq!(a.to_pixel().unwrap(), (0.0, 0.0));
        assert_eq!(b.to_pixel().unwrap(), (50.0, 50.0));
        let outside = ImageLine::new(Vector3::new(0.0, 1.0, -80.0)).unwrap();
        assert!(border_points(&outside, ImageSize::new(100.0, 50.0)).is_none());
    }

    #[test]
    fn border_points_of_vertical() {
        let l = ImageLine::new(Vector3::new(1.0, 0.0, -30.0)).unwrap();
        let (a, b) = border_points(&l, ImageSize::new(100.0, 50.0)).unwrap();
        assert_eq!(a.to_pixel().unwrap(), (30.0, 0.0));
        assert_eq!(b.to_pixel().unwrap(), (30.0, 50.0));
    }
}
