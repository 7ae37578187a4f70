//! Variance profiles `a_k` for Gaussian Taylor series
//! `f(z) = sum zeta_k a_k z^k / sqrt(k!)`.
//!
//! `ConstantOne` is the GEF itself. `JlmBanded` lowers the variance on a
//! band of degrees just above `R^2` and raises it symmetrically just below,
//! which tilts the mean zero count of the disk `R D` downward; it is the
//! sampling measure used for deficit importance sampling.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inclusive integer band `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBand {
    pub lo: u64,
    pub hi: u64,
}

impl DegreeBand {
    pub fn contains(&self, k: u64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

/// Coefficient standard deviations `a_k`.
///
/// Serialized as `{"kind": "constant_one"}`,
/// `{"kind": "jlm_banded", "R": .., "alpha": .., "j_minus": [lo, hi], "j_plus": [lo, hi]}` or
/// `{"kind": "explicit_table", "values": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceProfile {
    ConstantOne,
    JlmBanded {
        #[serde(rename = "R")]
        radius: f64,
        alpha: f64,
        j_minus: DegreeBand,
        j_plus: DegreeBand,
    },
    ExplicitTable {
        values: Vec<f64>,
    },
}

impl VarianceProfile {
    pub fn constant_one() -> Self {
        VarianceProfile::ConstantOne
    }

    /// Banded profile with `N = floor(R)` tilted degrees on each side:
    /// `J_minus` starts at `ceil(R^2 - 2R) + 1` and `J_plus` at
    /// `ceil(R^2 + R) + 1`, each holding `N` consecutive integers, so both
    /// bands sit between `R^2 -+ 2R` and `R^2 -+ R` for every `R >= 2`.
    /// `a_k^2 = 1 + R^(alpha-1)` on `J_minus`, `1 - R^(alpha-1)` on `J_plus`,
    /// and `1` elsewhere.
    pub fn jlm_banded(radius: f64, alpha: f64) -> Result<Self> {
        if !(radius >= 2.0) {
            return Err(Error::precondition(format!(
                "jlm_banded requires R >= 2, got {radius}"
            )));
        }
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(Error::precondition(format!(
                "jlm_banded requires alpha in (1/2, 1), got {alpha}"
            )));
        }
        let n = radius.floor() as u64;
        let r2 = radius * radius;
        let minus_lo = (r2 - 2.0 * radius).ceil() as u64 + 1;
        let plus_lo = (r2 + radius).ceil() as u64 + 1;
        Ok(VarianceProfile::JlmBanded {
            radius,
            alpha,
            j_minus: DegreeBand {
                lo: minus_lo,
                hi: minus_lo + n - 1,
            },
            j_plus: DegreeBand {
                lo: plus_lo,
                hi: plus_lo + n - 1,
            },
        })
    }

    pub fn explicit_table(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::precondition(
                "explicit_table values must be finite and non-negative",
            ));
        }
        Ok(VarianceProfile::ExplicitTable { values })
    }

    /// The tilt magnitude `R^(alpha-1)` of a banded profile.
    pub fn jlm_tilt(&self) -> Option<f64> {
        match self {
            VarianceProfile::JlmBanded { radius, alpha, .. } => Some(radius.powf(alpha - 1.0)),
            _ => None,
        }
    }

    /// `a_k`.
    pub fn value(&self, k: usize) -> Result<f64> {
        Ok(self.value_squared(k)?.sqrt())
    }

    /// `a_k^2` (exact band membership test, no rounding).
    pub fn value_squared(&self, k: usize) -> Result<f64> {
        match self {
            VarianceProfile::ConstantOne => Ok(1.0),
            VarianceProfile::JlmBanded {
                radius,
                alpha,
                j_minus,
                j_plus,
            } => {
                let k = k as u64;
                let tilt = radius.powf(alpha - 1.0);
                if j_minus.contains(k) {
                    Ok(1.0 + tilt)
                } else if j_plus.contains(k) {
                    Ok(1.0 - tilt)
                } else {
                    Ok(1.0)
                }
            }
            VarianceProfile::ExplicitTable { values } => {
                values.get(k).map(|v| v * v).ok_or(Error::IndexBeyondTable)
            }
        }
    }

    /// Indices with `a_k != 1`, with their `a_k^2`. Empty for the constant
    /// profile. Used by the Radon-Nikodym weight and the exact mean formula.
    pub fn tilted_indices(&self) -> Vec<(usize, f64)> {
        match self {
            VarianceProfile::ConstantOne => Vec::new(),
            VarianceProfile::JlmBanded {
                radius,
                alpha,
                j_minus,
                j_plus,
            } => {
                let tilt = radius.powf(alpha - 1.0);
                j_minus
                    .iter()
                    .map(|k| (k as usize, 1.0 + tilt))
                    .chain(j_plus.iter().map(|k| (k as usize, 1.0 - tilt)))
                    .collect()
            }
            VarianceProfile::ExplicitTable { values } => values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 1.0)
                .map(|(k, v)| (k, v * v))
                .collect(),
        }
    }

    /// Upper bound on `sup_k a_k`, used by the truncation planner.
    pub fn sup_value(&self) -> f64 {
        match self {
            VarianceProfile::ConstantOne => 1.0,
            VarianceProfile::JlmBanded { radius, alpha, .. } => {
                (1.0 + radius.powf(alpha - 1.0)).sqrt()
            }
            VarianceProfile::ExplicitTable { values } => {
                values.iter().cloned().fold(1.0, f64::max)
            }
        }
    }

    /// Largest representable degree (None when unbounded).
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            VarianceProfile::ExplicitTable { values } => Some(values.len().saturating_sub(1)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_is_one_everywhere() {
        let p = VarianceProfile::constant_one();
        assert_eq!(p.value(7).unwrap(), 1.0);
        assert_eq!(p.value(0).unwrap(), 1.0);
    }

    #[test]
    fn jlm_banded_values_match_direct_evaluation() {
        // R = 10, alpha = 0.75: a_k = sqrt(1 + 10^(-1/4)) on J_minus,
        // sqrt(1 - 10^(-1/4)) on J_plus, 1 elsewhere.
        let p = VarianceProfile::jlm_banded(10.0, 0.75).unwrap();
        let tilt = 10f64.powf(-0.25);
        let (j_minus, j_plus) = match &p {
            VarianceProfile::JlmBanded {
                j_minus, j_plus, ..
            } => (*j_minus, *j_plus),
            _ => unreachable!(),
        };
        assert_eq!(j_minus, DegreeBand { lo: 81, hi: 90 });
        assert_eq!(j_plus, DegreeBand { lo: 111, hi: 120 });
        let inside_minus = p.value(j_minus.lo as usize).unwrap();
        assert!((inside_minus - (1.0 + tilt).sqrt()).abs() < 1e-15);
        let inside_plus = p.value(j_plus.hi as usize).unwrap();
        assert!((inside_plus - (1.0 - tilt).sqrt()).abs() < 1e-15);
        // Outside both bands.
        assert_eq!(p.value(100).unwrap(), 1.0);
        assert_eq!(p.value(0).unwrap(), 1.0);
    }

    #[test]
    fn jlm_bands_sit_between_stated_endpoints() {
        for r in [2.0, 4.0, 8.0, 10.0, 16.0, 7.5] {
            let p = VarianceProfile::jlm_banded(r, 0.75).unwrap();
            let (j_minus, j_plus) = match &p {
                VarianceProfile::JlmBanded {
                    j_minus, j_plus, ..
                } => (*j_minus, *j_plus),
                _ => unreachable!(),
            };
            let r2 = r * r;
            assert!(j_minus.lo as f64 >= r2 - 2.0 * r);
            assert!((j_minus.hi as f64) <= r2 - r + 1.0);
            assert!(j_plus.lo as f64 >= r2 + r);
            assert!((j_plus.hi as f64) <= r2 + 2.0 * r + 1.0);
            assert_eq!(j_minus.len(), r.floor() as u64);
            assert_eq!(j_plus.len(), r.floor() as u64);
        }
    }

    #[test]
    fn explicit_table_out_of_range_errors() {
        let p = VarianceProfile::explicit_table(vec![1.0, 0.5]).unwrap();
        assert_eq!(p.value(1).unwrap(), 0.5);
        assert!(matches!(p.value(2), Err(Error::IndexBeyondTable)));
    }

    #[test]
    fn serde_round_trip() {
        let p = VarianceProfile::jlm_banded(8.0, 0.75).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"kind\":\"jlm_banded\""));
        assert!(text.contains("\"R\":8.0"));
        let q: VarianceProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(p, q);

        let t = VarianceProfile::explicit_table(vec![1.0, 2.0, 0.0]).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let u: VarianceProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(t, u);
    }

    #[test]
    fn negative_table_rejected() {
        assert!(VarianceProfile::explicit_table(vec![1.0, -0.1]).is_err());
    }
}
