//! Schatten p-norms, mixed (p,q) norms, the orthonormal-pair functional,
//! and the inequality checks relating an operator to its cross Gram matrix.
//!
//! Compactness and Schatten-class *membership* are vacuous in finite
//! dimension — every matrix qualifies. What remains quantitative, and what
//! this module implements, are the norm inequalities themselves plus a
//! truncation-decay diagnostic that plays the role of the asymptotic
//! statements.

use serde::Serialize;

use crate::certificate::BoundCheck;
use crate::error::{Error, Result};
use crate::frame::FrameSystem;
use crate::gram::cross_gram;
use crate::matrix::LinearMap;
use crate::tolerance::TolerancePolicy;

/// Schatten p-norm `(Σ σᵢᵖ)^{1/p}` of the singular values.
///
/// Defined for all `p > 0`; for `p < 1` this is a quasi-norm.
pub fn schatten_norm(a: &LinearMap, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::pre(format!("Schatten norm needs p > 0, got {p}")));
    }
    let svd = a.svd()?;
    let sum: f64 = svd.singular_values().iter().map(|s| s.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Mixed norm: ℓ^q along each row, then ℓ^p across rows.
///
/// Coincides with the Frobenius norm at `p = q = 2`.
pub fn mixed_norm(a: &LinearMap, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::pre(format!(
            "mixed norm needs p, q > 0, got p = {p}, q = {q}"
        )));
    }
    let m = a.matrix();
    let mut outer = 0.0;
    for i in 0..m.nrows() {
        let mut inner = 0.0;
        for j in 0..m.ncols() {
            inner += m[(i, j)].norm().powf(q);
        }
        outer += inner.powf(p / q);
    }
    Ok(outer.powf(1.0 / p))
}

/// `(Σᵢ |⟨U eᵢ, fᵢ⟩|^p)^{1/p}` for orthonormal bases `E` of the domain and
/// `F` of the codomain. The supremum of this quantity over all orthonormal
/// pairs is the Schatten p-norm, attained at the singular-vector bases.
pub fn onb_pair_functional(
    u: &LinearMap,
    domain_basis: &FrameSystem,
    codomain_basis: &FrameSystem,
    p: f64,
    pol: &TolerancePolicy,
) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::pre(format!("functional needs p > 0, got {p}")));
    }
    if domain_basis.dim() != u.cols() || codomain_basis.dim() != u.rows() {
        return Err(Error::dim(format!(
            "operator is {}x{} but the bases live in ℂ^{} / ℂ^{}",
            u.rows(),
            u.cols(),
            codomain_basis.dim(),
            domain_basis.dim()
        )));
    }
    if domain_basis.count() != codomain_basis.count() {
        return Err(Error::dim(
            "paired bases must have the same number of elements",
        ));
    }
    for (name, basis) in [("domain", domain_basis), ("codomain", codomain_basis)] {
        if !matches!(
            basis.classify(pol).kind,
            crate::frame::FrameKind::OrthonormalBasis
        ) {
            return Err(Error::pre(format!(
                "{name} family is not an orthonormal basis"
            )));
        }
    }
    let mut sum = 0.0;
    for i in 0..domain_basis.count() {
        let mapped = u.apply(&domain_basis.vector(i))?;
        let ip = codomain_basis.vector(i).dotc(&mapped); // ⟨U eᵢ, fᵢ⟩
        sum += ip.norm().powf(p);
    }
    Ok(sum.powf(1.0 / p))
}

/// Norm comparison of an operator against its cross Gram matrix.
#[derive(Clone, Debug, Serialize)]
pub struct SchattenReport {
    pub p: f64,
    /// Schatten p-norm of the operator.
    pub norm_operator: f64,
    /// Schatten p-norm of the Gram matrix.
    pub norm_gram: f64,
    /// `√(B_Φ B_Ψ) · ‖U‖_p`, the ideal-property bound on `‖G‖_p`.
    pub ideal_bound: f64,
    /// Diagonal p-sum `(Σᵢ |⟨U ψᵢ, φᵢ⟩|^p)^{1/p}` (needs a square Gram).
    pub diagonal_p_sum: Option<f64>,
    /// Mixed (p, 2) norm of the Gram matrix.
    pub mixed_p2_norm: f64,
    /// Entrywise double sum `Σᵢⱼ |⟨U ψⱼ, φᵢ⟩|²`.
    pub entrywise_square_sum: f64,
    pub checks: Vec<BoundCheck>,
    pub all_hold: bool,
}

/// Builds the cross Gram matrix and evaluates every Schatten-side check:
/// the ideal bound `‖G‖_p ≤ √(B_Φ B_Ψ)·‖U‖_p`, the Hilbert–Schmidt identity
/// `‖G‖₂² = Σᵢⱼ |⟨U ψⱼ, φᵢ⟩|²`, and the diagonal-sum domination
/// `(Σᵢ |Gᵢᵢ|^p)^{1/p} ≤ ‖G‖_p` (for square Gram matrices).
pub fn schatten_gram_check(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    p: f64,
    pol: &TolerancePolicy,
) -> Result<SchattenReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::pre(format!("Schatten check needs p > 0, got {p}")));
    }
    let gram = cross_gram(u, left, right)?;
    let g = gram.matrix();

    let norm_operator = schatten_norm(u, p)?;
    let norm_gram = schatten_norm(g, p)?;
    let ideal_bound = (left.bessel_bound() * right.bessel_bound()).sqrt() * norm_operator;
    let mixed_p2_norm = mixed_norm(g, p, 2.0)?;
    let entrywise_square_sum = g.frobenius_norm().powi(2);

    let slack = pol.equality_tolerance * (1.0 + ideal_bound);
    let mut checks = vec![BoundCheck::le(
        "‖G‖_p ≤ √(B_Φ B_Ψ)·‖U‖_p",
        norm_gram,
        ideal_bound + slack,
    )];

    let diagonal_p_sum = if g.is_square() {
        let sum: f64 = (0..g.rows()).map(|i| g.entry(i, i).norm().powf(p)).sum();
        let diag = sum.powf(1.0 / p);
        checks.push(BoundCheck::le(
            "(Σ|⟨Uψᵢ,φᵢ⟩|^p)^{1/p} ≤ ‖G‖_p",
            diag,
            norm_gram + pol.equality_tolerance * (1.0 + norm_gram),
        ));
        Some(diag)
    } else {
        None
    };

    // Hilbert–Schmidt cross-check: ‖G‖₂ is the Frobenius norm.
    let hs_norm = schatten_norm(g, 2.0)?;
    checks.push(BoundCheck::le(
        "|‖G‖₂² − Σᵢⱼ|Gᵢⱼ|²| ≤ tol·scale",
        (hs_norm.powi(2) - entrywise_square_sum).abs(),
        pol.equality_tolerance * (1.0 + entrywise_square_sum),
    ));

    let all_hold = checks.iter().all(|c| c.holds);
    Ok(SchattenReport {
        p,
        norm_operator,
        norm_gram,
        ideal_bound,
        diagonal_p_sum,
        mixed_p2_norm,
        entrywise_square_sum,
        checks,
        all_hold,
    })
}

/// Tail behaviour of nested truncations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayTrend {
    /// Tails decrease and the last is far below the first.
    Decaying,
    /// Tails are nonincreasing but not substantially smaller.
    NoDecay,
    /// Tails grow somewhere along the sequence.
    Increasing,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub size: usize,
    /// `max_{i > size/2} Σₗ |⟨U ψᵢ, φₗ⟩|²` over the truncated index range.
    pub tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub trend: DecayTrend,
}

/// Diagnostic replacement for the asymptotic compactness statements: for
/// each truncation size n the generators produce `(Uₙ, Φₙ, Ψₙ)`, and the
/// table records the worst late-column mass `max_{i>n/2} Σₗ |⟨Uψᵢ, φₗ⟩|²`.
/// A compact-limit family shows tails that decay as n grows.
pub fn truncation_decay(
    op_gen: impl Fn(usize) -> Result<LinearMap>,
    left_gen: impl Fn(usize) -> Result<FrameSystem>,
    right_gen: impl Fn(usize) -> Result<FrameSystem>,
    sizes: &[usize],
) -> Result<DecayTable> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let u = op_gen(n)?;
        let left = left_gen(n)?;
        let right = right_gen(n)?;
        let gram = cross_gram(&u, &left, &right)?;
        let g = gram.matrix();
        let mut tail: f64 = 0.0;
        for i in 0..g.cols() {
            if 2 * (i + 1) <= g.cols() {
                continue; // only columns i > n/2 (1-based)
            }
            let mass: f64 = (0..g.rows()).map(|l| g.entry(l, i).norm_sqr()).sum();
            tail = tail.max(mass);
        }
        rows.push(DecayRow { size: n, tail });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].tail <= w[0].tail * (1.0 + 1e-12) + 1e-15);
    let first = rows.first().map(|r| r.tail).unwrap_or(0.0);
    let last = rows.last().map(|r| r.tail).unwrap_or(0.0);
    let trend = if !monotone {
        DecayTrend::Increasing
    } else if last <= 0.5 * first || last <= 1e-12 {
        DecayTrend::Decaying
    } else {
        DecayTrend::NoDecay
    };
    Ok(DecayTable { rows, trend })
}
