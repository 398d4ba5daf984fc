//! Machine-checkable certificates: named hypothesis checks with computed
//! quantities, thresholds, a verdict, and the conclusion the verdict entitles.

use serde::Serialize;

/// One numeric hypothesis line: `lhs < rhs` (strict, with a relative guard
/// band) or `lhs <= rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl BoundCheck {
    /// Strict inequality with a relative guard band: holds iff
    /// `lhs < rhs · (1 − guard)`, so exact-boundary inputs stay inconclusive.
    pub fn strict(label: impl Into<String>, lhs: f64, rhs: f64, guard: f64) -> Self {
        let holds = lhs.is_finite() && rhs.is_finite() && lhs < rhs * (1.0 - guard);
        BoundCheck {
            label: label.into(),
            lhs,
            rhs,
            strict: true,
            holds,
        }
    }

    /// Plain `lhs <= rhs` check.
    pub fn le(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let holds = lhs.is_finite() && rhs.is_finite() && lhs <= rhs;
        BoundCheck {
            label: label.into(),
            lhs,
            rhs,
            strict: false,
            holds,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// A named theorem-hypothesis certificate. `verdict` is true only when all
/// checks hold; the conclusion states what the verdict then guarantees.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub checks: Vec<BoundCheck>,
    pub verdict: bool,
    pub conclusion: String,
}

impl Certificate {
    pub fn new(
        name: impl Into<String>,
        checks: Vec<BoundCheck>,
        conclusion: impl Into<String>,
    ) -> Self {
        let verdict = checks.iter().all(|c| c.holds);
        Certificate {
            name: name.into(),
            checks,
            verdict,
            conclusion: conclusion.into(),
        }
    }
}
