//! Scoring kernel for location ranking. Generic over the floating-point
//! scalar so callers can trade precision for space; the crate-level
//! [`crate::Score`] alias fixes `f64` for the concrete pipeline.

use num_traits::Float;
use thiserror::Error;

use crate::fspec::levenshtein;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
}

/// Weights and limits for the composite location scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<F> {
    /// Weight of the method-name score inside the location score.
    pub c_mns: F,
    /// Weight of the variable-availability score inside the location score.
    pub c_vas: F,
    /// Weight of the mean location score inside the aggregate score.
    pub c_cls: F,
    /// Weight of the cluster-quantity score inside the aggregate score.
    pub c_cqs: F,
    /// Maximum number of ranked mapping sets kept.
    pub list_cap: usize,
}

impl<F: Float> Default for Coefficients<F> {
    fn default() -> Self {
        Coefficients {
            c_mns: F::one(),
            c_vas: F::one(),
            c_cls: F::one(),
            c_cqs: F::from(0.0001).expect("scalar holds 1e-4"),
            list_cap: 100,
        }
    }
}

impl<F: Float> Coefficients<F> {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let zero = F::zero();
        for (name, v) in [
            ("cMNS", self.c_mns),
            ("cVAS", self.c_vas),
            ("cCLS", self.c_cls),
            ("cCQS", self.c_cqs),
        ] {
            if !(v >= zero) || !v.is_finite() {
                return Err(ScoreError::InvalidCoefficients(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.c_mns + self.c_vas <= zero {
            return Err(ScoreError::InvalidCoefficients(
                "cMNS + cVAS must be positive".to_string(),
            ));
        }
        if self.c_cls + self.c_cqs <= zero {
            return Err(ScoreError::InvalidCoefficients(
                "cCLS + cCQS must be positive".to_string(),
            ));
        }
        if self.list_cap == 0 {
            return Err(ScoreError::InvalidCoefficients(
                "listCap must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Method-name score: inverse edit distance between a cluster label and a
/// method name, in (0, 1]. Case-sensitive by construction.
pub fn mns<F: Float>(label: &str, method_name: &str) -> F {
    let d = levenshtein(label, method_name);
    F::one() / (F::from(d).expect("distance fits the scalar") + F::one())
}

/// Variable-availability score from per-type (available, required) counts.
/// A cluster with no requirements scores 1; otherwise each required type
/// contributes `min(avail/required, 1)` multiplicatively, so any type with
/// no available value zeroes the score.
pub fn vas<F: Float>(per_type: &[(usize, usize)]) -> F {
    let mut product = F::one();
    for &(avail, required) in per_type {
        if required == 0 {
            continue;
        }
        let ratio = F::from(avail).expect("count fits") / F::from(required).expect("count fits");
        product = product * ratio.min(F::one());
    }
    product
}

/// Location score: weighted mean of the name and availability scores.
pub fn cls<F: Float>(mns: F, vas: F, coeffs: &Coefficients<F>) -> F {
    (coeffs.c_mns * mns + coeffs.c_vas * vas) / (coeffs.c_mns + coeffs.c_vas)
}

/// Cluster-quantity score over the distinct host methods of a mapping set:
/// the mean of inverse per-method cluster counts. Packing several clusters
/// into one method lowers it; one cluster per method yields 1.
pub fn cqs<F: Float>(clusters_per_method: &[usize]) -> F {
    if clusters_per_method.is_empty() {
        return F::zero();
    }
    let mut sum = F::zero();
    for &count in clusters_per_method {
        if count == 0 {
            continue;
        }
        sum = sum + F::one() / F::from(count).expect("count fits");
    }
    sum / F::from(clusters_per_method.len()).expect("count fits")
}

/// Class-coupling score over (efferent, afferent) per-class counts: mean
/// instability `Ce / (Ce + Ca)`. A class with no couplings at all
/// contributes 0. Reported for inspection; it does not enter the ranking.
pub fn ccs<F: Float>(per_class: &[(usize, usize)]) -> F {
    if per_class.is_empty() {
        return F::zero();
    }
    let mut sum = F::zero();
    for &(ce, ca) in per_class {
        if ce + ca == 0 {
            continue;
        }
        sum = sum + F::from(ce).expect("count fits") / F::from(ce + ca).expect("count fits");
    }
    sum / F::from(per_class.len()).expect("count fits")
}

/// Aggregate score of a mapping set. Zero whenever the dependency order is
/// violated; otherwise a weighted mean of the quantity score and the mean
/// location score, dominated by the latter under the default weights.
pub fn cas<F: Float>(dependencies_hold: bool, cqs: F, mean_cls: F, coeffs: &Coefficients<F>) -> F {
    if !dependencies_hold {
        return F::zero();
    }
    (coeffs.c_cqs * cqs + coeffs.c_cls * mean_cls) / (coeffs.c_cqs + coeffs.c_cls)
}

/// Largest aggregate score any completion of a partial mapping set could
/// reach, used to stop the ranked search early: assume the dependency test
/// passes and the quantity score is perfect.
pub fn cas_upper_bound<F: Float>(mean_cls: F, coeffs: &Coefficients<F>) -> F {
    (coeffs.c_cqs * F::one() + coeffs.c_cls * mean_cls) / (coeffs.c_cqs + coeffs.c_cls)
}
