use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::geometry::SedKind;

/// Inlier ratio used to size the RANSAC budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InlierRatio {
    /// Budget from a known (or assumed) ratio, fixed before sampling.
    Fixed(f64),
    /// Budget re-derived from the best hypothesis found so far.
    Adaptive,
}

impl Serialize for InlierRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InlierRatio::Fixed(r) => s.serialize_f64(*r),
            InlierRatio::Adaptive => s.serialize_str("adaptive"),
        }
    }
}

impl<'de> Deserialize<'de> for InlierRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(InlierRatio::Fixed(r)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for InlierRatio {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(InlierRatio::Adaptive);
        }
        s.parse::<f64>()
            .map(InlierRatio::Fixed)
            .map_err(|_| format!("expected a probability or \"adaptive\", got {s:?}"))
    }
}

/// Minimal solver used in the completion stage and by plain RANSAC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    SevenPoint,
    EightPoint,
}

impl Variant {
    /// Correspondences per solver call.
    pub fn minimal_size(self) -> usize {
        match self {
            Variant::SevenPoint => 7,
            Variant::EightPoint => 8,
        }
    }
}

/// Which inlier ratio decides the low-ratio fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackBasis {
    /// The configured ratio; checked before any sampling.
    #[default]
    Assumed,
    /// The ratio supported by the separable estimate; checked afterwards.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub confidence: f64,
    pub inlier_ratio: InlierRatio,
    /// Homography transfer threshold in pixels.
    pub t1: f64,
    /// Symmetric epipolar distance threshold in pixels.
    pub t2: f64,
    pub variant: Variant,
    pub fallback_inlier_ratio: f64,
    pub fallback_basis: FallbackBasis,
    pub max_iterations: u64,
    pub seed: u64,
    pub min_success_inliers: usize,
    pub refit_on_inliers: bool,
    pub sed_kind: SedKind,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            confidence: 0.99,
            inlier_ratio: InlierRatio::Fixed(0.5),
            t1: 0.5,
            t2: 3.0,
            variant: Variant::SevenPoint,
            fallback_inlier_ratio: 0.3,
            fallback_basis: FallbackBasis::Assumed,
            max_iterations: 100_000,
            seed: 0,
            min_success_inliers: 20,
            refit_on_inliers: true,
            sed_kind: SedKind::Mean,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence must lie in (0, 1)"));
        }
        if let InlierRatio::Fixed(r) = self.inlier_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(invalid("inlier ratio must lie in (0, 1]"));
            }
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(invalid("thresholds must be positive"));
        }
        if !(self.fallback_inlier_ratio > 0.0 && self.fallback_inlier_ratio < 1.0) {
            return Err(invalid("fallback inlier ratio must lie in (0, 1)"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        Ok(())
    }

    /// Epipolar threshold on the scale of the configured distance.
    pub(crate) fn sed_threshold(&self) -> f64 {
        match self.sed_kind {
            SedKind::Mean => self.t2,
            SedKind::SquaredSum => self.t2 * self.t2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inlier_ratio_serde() {
        let fixed: InlierRatio = serde_json::from_str("0.4").unwrap();
        assert_eq!(fixed, InlierRatio::Fixed(0.4));
        let ad: InlierRatio = serde_json::from_str("\"adaptive\"").unwrap();
        assert_eq!(ad, InlierRatio::Adaptive);
        assert_eq!(serde_json::to_string(&InlierRatio::Adaptive).unwrap(), "\"adaptive\"");
        assert!("nope".parse::<InlierRatio>().is_err());
    }

    #[test]
    fn validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        let bad = EstimatorConfig { confidence: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig { fallback_inlier_ratio: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
