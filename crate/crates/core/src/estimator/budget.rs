use crate::error::{invalid, Result};

/// A RANSAC sample budget, clipped to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationBudget {
    pub count: u64,
    /// The formula asked for more than the cap allows.
    pub saturated: bool,
}

/// Samples needed to draw at least one all-inlier sample of size `k` with
/// probability `confidence` when a fraction `outlier_rate` are outliers:
/// `ceil(log(1 - p) / log(1 - (1 - r)^k))`, and 1 when `r = 0`.
///
/// ```
/// use sepfour::estimator::ransac_iterations;
/// assert_eq!(ransac_iterations(4, 0.6, 0.99).unwrap(), 178);
/// assert_eq!(ransac_iterations(3, 0.6, 0.99).unwrap(), 70);
/// ```
pub fn ransac_iterations(k: usize, outlier_rate: f64, confidence: f64) -> Result<u64> {
    Ok(iteration_budget(k, outlier_rate, confidence, u64::MAX)?.count)
}

/// [`ransac_iterations`] with a cap.
pub fn iteration_budget(k: usize, outlier_rate: f64, confidence: f64, cap: u64) -> Result<IterationBudget> {
    if k == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    if !(0.0..1.0).contains(&outlier_rate) {
        return Err(invalid("outlier rate must lie in [0, 1)"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid("confidence must lie in (0, 1)"));
    }
    let cap = cap.max(1);
    if outlier_rate == 0.0 {
        return Ok(IterationBudget { count: 1, saturated: false });
    }
    let all_inlier = (1.0 - outlier_rate).powi(k as i32);
    let denom = (-all_inlier).ln_1p();
    if denom == 0.0 {
        return Ok(IterationBudget { count: cap, saturated: true });
    }
    let n = ((1.0 - confidence).ln() / denom).ceil().max(1.0);
    if n >= cap as f64 {
        Ok(IterationBudget { count: cap, saturated: n > cap as f64 })
    } else {
        Ok(IterationBudget { count: n as u64, saturated: false })
    }
}
