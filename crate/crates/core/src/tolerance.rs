//! The single tolerance policy shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical decision thresholds.
///
/// `relative_rank_cutoff` classifies singular values: σᵢ counts toward the
/// rank iff σᵢ > cutoff · σ₁, so scaled problems classify identically.
/// `equality_tolerance` decides operator/matrix equality. `condition_limit`
/// is the largest condition number treated as reliably invertible.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub relative_rank_cutoff: f64,
    pub equality_tolerance: f64,
    pub condition_limit: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            relative_rank_cutoff: 1e-10,
            equality_tolerance: 1e-9,
            condition_limit: 1e12,
        }
    }
}

impl TolerancePolicy {
    pub fn new(
        relative_rank_cutoff: f64,
        equality_tolerance: f64,
        condition_limit: f64,
    ) -> Result<Self> {
        let pol = TolerancePolicy {
            relative_rank_cutoff,
            equality_tolerance,
            condition_limit,
        };
        pol.validate()?;
        Ok(pol)
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = self.relative_rank_cutoff > 0.0
            && self.equality_tolerance > 0.0
            && self.condition_limit > 0.0;
        if !all_positive
            || !self.relative_rank_cutoff.is_finite()
            || !self.equality_tolerance.is_finite()
            || !self.condition_limit.is_finite()
        {
            return Err(Error::InvalidTolerance(
                "all fields must be positive and finite".into(),
            ));
        }
        if self.relative_rank_cutoff >= 1.0 {
            return Err(Error::InvalidTolerance(
                "relative_rank_cutoff must be below 1".into(),
            ));
        }
        Ok(())
    }

    /// Relative guard band applied to strict inequalities so floating-point
    /// boundary cases resolve to "inconclusive" rather than flipping.
    pub fn strict_guard(&self) -> f64 {
        1e-9
    }

    /// Scale-aware equality test for scalars.
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.equality_tolerance * 1.0_f64.max(a.abs()).max(b.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        TolerancePolicy::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(TolerancePolicy::new(0.0, 1e-9, 1e12).is_err());
        assert!(TolerancePolicy::new(1e-10, -1.0, 1e12).is_err());
        assert!(TolerancePolicy::new(0.5, 1e-9, 1e12).is_ok());
        assert!(TolerancePolicy::new(1.0, 1e-9, 1e12).is_err());
        assert!(TolerancePolicy::new(1e-10, f64::NAN, 1e12).is_err());
    }
}
