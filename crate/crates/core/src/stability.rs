//! Perturbation certificates for invertibility of cross Gram matrices and
//! Neumann-series inverse construction.
//!
//! Every certificate is one-sided: a verdict of `true` guarantees the
//! perturbed Gram matrix is invertible (witnessed by its smallest singular
//! value); a failing bound only means "inconclusive", never "singular".

use rand::Rng;
use serde::Serialize;

use crate::certificate::BoundCheck;
use crate::error::{Error, Result};
use crate::frame::FrameSystem;
use crate::gram::cross_gram;
use crate::matrix::LinearMap;
use crate::tolerance::TolerancePolicy;

/// Hard cap on Neumann series terms.
const NEUMANN_CAP: usize = 10_000;

/// Perturbation budget for the joint stability certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StabilityBudget {
    pub lambda: [f64; 4],
    pub mu: f64,
}

impl StabilityBudget {
    pub fn new(lambda: [f64; 4], mu: f64) -> Result<Self> {
        if lambda.iter().any(|l| !l.is_finite() || *l < 0.0) || !mu.is_finite() || mu < 0.0 {
            return Err(Error::pre("budget entries must be finite and nonnegative"));
        }
        Ok(StabilityBudget { lambda, mu })
    }

    pub fn lambda_total(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

/// Outcome of one stability theorem's hypothesis check.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityCertificate {
    pub theorem: String,
    pub checks: Vec<BoundCheck>,
    pub verdict: bool,
    /// Smallest singular value of the perturbed Gram matrix, set on success.
    pub sigma_min_witness: Option<f64>,
    /// Relative mismatch between the series/closed-form inverse and the
    /// direct inverse, when one was evaluated.
    pub series_residual: Option<f64>,
    pub series_terms: Option<usize>,
    pub conclusion: String,
}

impl StabilityCertificate {
    fn new(theorem: &str, checks: Vec<BoundCheck>, conclusion: &str) -> Self {
        let verdict = checks.iter().all(|c| c.holds);
        StabilityCertificate {
            theorem: theorem.into(),
            checks,
            verdict,
            sigma_min_witness: None,
            series_residual: None,
            series_terms: None,
            conclusion: conclusion.into(),
        }
    }
}

/// Result of a truncated Neumann series inversion.
#[derive(Clone, Debug, Serialize)]
pub struct NeumannInverse {
    pub inverse: LinearMap,
    pub terms: usize,
    /// Contraction ratio `r = ‖U₁⁻¹‖·‖U₁−U₂‖`.
    pub contraction_ratio: f64,
    /// Guaranteed truncation error `r^{K+1}/(1−r)·‖U₁⁻¹‖` at the final K.
    pub truncation_bound: f64,
    /// `‖U₂ X − I‖` of the returned partial sum.
    pub residual: f64,
    /// Whether the adaptive stopping criterion was met before the term cap.
    pub converged: bool,
}

/// Inverts `U₂` through the series `Σ [U₁⁻¹(U₁−U₂)]ᵏ U₁⁻¹` anchored at an
/// invertible `U₁`. Convergence requires `r = ‖U₁⁻¹‖·‖U₁−U₂‖ < 1`; terms are
/// added until the guaranteed tail is below `tol·‖partial sum‖` or the cap.
pub fn neumann_inverse(
    u1: &LinearMap,
    u2: &LinearMap,
    pol: &TolerancePolicy,
) -> Result<NeumannInverse> {
    if u1.rows() != u2.rows() || u1.cols() != u2.cols() || !u1.is_square() {
        return Err(Error::dim("Neumann inversion needs equal square shapes"));
    }
    let u1_inv = u1.try_inverse(pol)?;
    let u1_inv_norm = u1_inv.operator_norm();
    let ratio = u1_inv_norm * (u1 - u2).operator_norm();
    if !(ratio < 1.0 - pol.strict_guard()) {
        return Err(Error::NotContractive { ratio });
    }

    let step = &u1_inv * &(u1 - u2);
    let mut term = u1_inv.clone();
    let mut sum = u1_inv.clone();
    let mut terms = 1usize;
    let mut bound = ratio / (1.0 - ratio) * u1_inv_norm;
    let mut converged = bound <= pol.equality_tolerance * 1.0f64.max(sum.operator_norm());
    while !converged && terms < NEUMANN_CAP {
        term = &step * &term;
        sum = &sum + &term;
        terms += 1;
        bound *= ratio;
        converged = bound <= pol.equality_tolerance * 1.0f64.max(sum.operator_norm());
    }

    let residual = (&(u2 * &sum) - &LinearMap::identity(u1.rows())).operator_norm();
    if converged && residual > 10.0 * pol.equality_tolerance * 1.0f64.max(u1_inv_norm) {
        return Err(Error::violation(
            "Neumann partial sum fails to invert",
            residual,
        ));
    }
    Ok(NeumannInverse {
        inverse: sum,
        terms,
        contraction_ratio: ratio,
        truncation_bound: bound,
        residual,
        converged,
    })
}

/// Adaptive matrix power series `Σ_{k≥0} Mᵏ C`, stopping when the current
/// term is negligible against the accumulated sum.
fn power_series(m: &LinearMap, c: &LinearMap) -> (LinearMap, usize) {
    let mut term = c.clone();
    let mut sum = c.clone();
    let mut terms = 1usize;
    while terms < NEUMANN_CAP {
        term = m * &term;
        sum = &sum + &term;
        terms += 1;
        if term.frobenius_norm() <= 1e-16 * sum.frobenius_norm() {
            break;
        }
    }
    (sum, terms)
}

fn gram_sigma_min(g: &LinearMap, pol: &TolerancePolicy) -> Result<(f64, bool)> {
    let svd = g.svd_with(pol)?;
    let invertible = g.is_square() && svd.rank() == g.rows();
    Ok((svd.sigma_min_positive(), invertible))
}

/// Certifies invertibility of `G_{U₁, U₂Φ, U₃Φ}` from invertibility of
/// `G_{U₁,Φ,Φ}` and the bound `‖U₂*U₁U₃ − U₁‖ < 1/(‖G⁻¹‖ B_Φ)`. For a
/// spanning Φ the certified case also pins the Neumann form of the inverse.
pub fn stability_three_ops(
    u1: &LinearMap,
    u2: &LinearMap,
    u3: &LinearMap,
    family: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<StabilityCertificate> {
    let base = cross_gram(u1, family, family)?;
    let base_inv = base
        .matrix()
        .try_inverse(pol)
        .map_err(|_| Error::Singular("the unperturbed Gram matrix must be invertible".into()))?;
    let b = family.bessel_bound();
    let lhs = (&(&u2.adjoint() * u1) * u3).distance(u1);
    let rhs = 1.0 / (base_inv.operator_norm() * b);
    let checks = vec![BoundCheck::strict(
        "‖U₂*U₁U₃ − U₁‖ < 1/(‖G⁻¹‖ B_Φ)",
        lhs,
        rhs,
        pol.strict_guard(),
    )];
    let mut cert = StabilityCertificate::new(
        "three-operator stability",
        checks,
        "G_{U₁,U₂Φ,U₃Φ} is invertible",
    );
    if !cert.verdict {
        return Ok(cert);
    }

    let perturbed = cross_gram(u1, &family.transform(u2)?, &family.transform(u3)?)?;
    let (sigma_min, invertible) = gram_sigma_min(perturbed.matrix(), pol)?;
    if !invertible {
        return Err(Error::violation(
            "certified perturbed Gram matrix is singular",
            sigma_min,
        ));
    }
    cert.sigma_min_witness = Some(sigma_min);

    if family.is_spanning(pol) {
        if !family.classify(pol).is_riesz_basis() {
            return Err(Error::violation(
                "spanning family under an invertible Gram must be a Riesz basis",
                0.0,
            ));
        }
        let u1_inv = u1
            .try_inverse(pol)
            .map_err(|_| Error::violation("U₁ must be invertible for a spanning family", 0.0))?;
        let step = &LinearMap::identity(u1.rows()) - &(&(&u1_inv * &u2.adjoint()) * &(u1 * u3));
        let (series, terms) = power_series(&step, &u1_inv);
        let dual = family.canonical_dual_with(pol)?;
        let formula = &(&dual.analysis() * &series) * dual.synthesis();
        let direct = perturbed.matrix().try_inverse(pol)?;
        let residual = formula.distance(&direct) / 1.0f64.max(direct.operator_norm());
        cert.series_residual = Some(residual);
        cert.series_terms = Some(terms);
        if residual > pol.equality_tolerance * 10.0 {
            return Err(Error::violation("Neumann form of the inverse", residual));
        }
    }
    Ok(cert)
}

/// Certifies invertibility of `G_{U₁,Φ,U₂Φ}` and `G_{U₁,U₂Φ,Φ}` from
/// `‖U₂ − I‖ < 1/(‖G⁻¹‖ B_Φ ‖U₁‖)`, and pins both closed-form inverses
/// through canonical duals when Φ is a frame and `U₁` invertible.
pub fn stability_factor(
    u1: &LinearMap,
    u2: &LinearMap,
    family: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<StabilityCertificate> {
    let base = cross_gram(u1, family, family)?;
    let base_inv = base
        .matrix()
        .try_inverse(pol)
        .map_err(|_| Error::Singular("the unperturbed Gram matrix must be invertible".into()))?;
    let lhs = u2.distance_to_identity();
    let rhs = 1.0 / (base_inv.operator_norm() * family.bessel_bound() * u1.operator_norm());
    let checks = vec![BoundCheck::strict(
        "‖U₂ − I‖ < 1/(‖G⁻¹‖ B_Φ ‖U₁‖)",
        lhs,
        rhs,
        pol.strict_guard(),
    )];
    let mut cert = StabilityCertificate::new(
        "factor stability",
        checks,
        "G_{U₁,Φ,U₂Φ} and G_{U₁,U₂Φ,Φ} are invertible",
    );
    if !cert.verdict {
        return Ok(cert);
    }

    let moved = family.transform(u2)?;
    let right_perturbed = cross_gram(u1, family, &moved)?;
    let left_perturbed = cross_gram(u1, &moved, family)?;
    let (s1, inv1) = gram_sigma_min(right_perturbed.matrix(), pol)?;
    let (s2, inv2) = gram_sigma_min(left_perturbed.matrix(), pol)?;
    if !inv1 || !inv2 {
        return Err(Error::violation(
            "certified perturbed Gram matrix is singular",
            s1.min(s2),
        ));
    }
    cert.sigma_min_witness = Some(s1.min(s2));

    if family.classify(pol).is_frame() && u1.is_invertible(pol) {
        let u1_inv = u1.try_inverse(pol)?;
        let family_dual = family.canonical_dual_with(pol)?;
        let moved_dual = moved.canonical_dual_with(pol)?;
        let closed_right = cross_gram(&u1_inv, &moved_dual, &family_dual)?;
        let closed_left = cross_gram(&u1_inv, &family_dual, &moved_dual)?;
        let direct_right = right_perturbed.matrix().try_inverse(pol)?;
        let direct_left = left_perturbed.matrix().try_inverse(pol)?;
        let r1 = closed_right.matrix().distance(&direct_right)
            / 1.0f64.max(direct_right.operator_norm());
        let r2 =
            closed_left.matrix().distance(&direct_left) / 1.0f64.max(direct_left.operator_norm());
        let residual = r1.max(r2);
        cert.series_residual = Some(residual);
        if residual > pol.equality_tolerance * 10.0 {
            return Err(Error::violation(
                "closed-form inverse via canonical duals",
                residual,
            ));
        }
    }
    Ok(cert)
}

/// The three single-perturbation certificates: operator (`V` for `U`),
/// right-frame (`Θ` for `Ψ`), and left-frame (`Ξ` for `Φ`).
pub fn perturb_certificates(
    u: &LinearMap,
    v: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    left_perturbed: &FrameSystem,
    right_perturbed: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<[StabilityCertificate; 3]> {
    let base = cross_gram(u, left, right)?;
    let base_inv = base
        .matrix()
        .try_inverse(pol)
        .map_err(|_| Error::Singular("the unperturbed Gram matrix must be invertible".into()))?;
    let inv_norm = base_inv.operator_norm();
    let u_norm = u.operator_norm();
    let guard = pol.strict_guard();

    // Operator perturbation.
    let lhs1 = u.distance(v);
    let rhs1 = 1.0 / (inv_norm * (left.bessel_bound() * right.bessel_bound()).sqrt());
    let mut c1 = StabilityCertificate::new(
        "operator perturbation",
        vec![BoundCheck::strict(
            "‖U − V‖ < 1/(‖G⁻¹‖ √(B_Φ B_Ψ))",
            lhs1,
            rhs1,
            guard,
        )],
        "G_{V,Φ,Ψ} is invertible",
    );
    if c1.verdict {
        let g = cross_gram(v, left, right)?;
        let (sigma, inv) = gram_sigma_min(g.matrix(), pol)?;
        if !inv {
            return Err(Error::violation("certified G_{V,Φ,Ψ} is singular", sigma));
        }
        c1.sigma_min_witness = Some(sigma);
    }

    // Right-frame perturbation.
    let lhs2 = right.elementwise_distance(right_perturbed)?;
    let rhs2 = 1.0 / (inv_norm * left.bessel_bound().sqrt() * u_norm);
    let mut c2 = StabilityCertificate::new(
        "right-frame perturbation",
        vec![BoundCheck::strict(
            "(Σ‖ψᵢ − θᵢ‖²)^½ < 1/(‖G⁻¹‖ √B_Φ ‖U‖)",
            lhs2,
            rhs2,
            guard,
        )],
        "G_{U,Φ,Θ} is invertible",
    );
    if c2.verdict {
        let g = cross_gram(u, left, right_perturbed)?;
        let (sigma, inv) = gram_sigma_min(g.matrix(), pol)?;
        if !inv {
            return Err(Error::violation("certified G_{U,Φ,Θ} is singular", sigma));
        }
        c2.sigma_min_witness = Some(sigma);
    }

    // Left-frame perturbation.
    let lhs3 = left.elementwise_distance(left_perturbed)?;
    let rhs3 = 1.0 / (inv_norm * right.bessel_bound().sqrt() * u_norm);
    let mut c3 = StabilityCertificate::new(
        "left-frame perturbation",
        vec![BoundCheck::strict(
            "(Σ‖φᵢ − ξᵢ‖²)^½ < 1/(‖G⁻¹‖ √B_Ψ ‖U‖)",
            lhs3,
            rhs3,
            guard,
        )],
        "G_{U,Ξ,Ψ} is invertible",
    );
    if c3.verdict {
        let g = cross_gram(u, left_perturbed, right)?;
        let (sigma, inv) = gram_sigma_min(g.matrix(), pol)?;
        if !inv {
            return Err(Error::violation("certified G_{U,Ξ,Ψ} is singular", sigma));
        }
        c3.sigma_min_witness = Some(sigma);
    }

    Ok([c1, c2, c3])
}

/// Certifies `G_{U,Φ,Ψ}` invertible from `Σᵢ ‖Uψᵢ − φᵢ‖² < A_Φ²/B_Φ` for a
/// Riesz basis Φ, and pins the Neumann form
/// `G⁻¹ = Σ (I − T_Φ⁻¹ U T_Ψ)ᵏ G_Φ⁻¹` against the direct inverse.
pub fn riesz_perturbation(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<StabilityCertificate> {
    let left_class = left.classify(pol);
    if !left_class.is_riesz_basis() {
        return Err(Error::pre("the anchor family must be a Riesz basis"));
    }
    if right.count() != left.count() || right.dim() != u.cols() {
        return Err(Error::dim("perturbing family has mismatched shape"));
    }
    let lhs = (&(u * right.synthesis()) - left.synthesis())
        .frobenius_norm()
        .powi(2);
    let rhs = left_class.lower.powi(2) / left_class.upper;
    let checks = vec![BoundCheck::strict(
        "Σ‖Uψᵢ − φᵢ‖² < A_Φ²/B_Φ",
        lhs,
        rhs,
        pol.strict_guard(),
    )];
    let mut cert = StabilityCertificate::new(
        "Riesz-anchor perturbation",
        checks,
        "G_{U,Φ,Ψ} is invertible",
    );
    if !cert.verdict {
        return Ok(cert);
    }

    let gram = cross_gram(u, left, right)?;
    let (sigma_min, invertible) = gram_sigma_min(gram.matrix(), pol)?;
    if !invertible {
        return Err(Error::violation(
            "certified G_{U,Φ,Ψ} is singular",
            sigma_min,
        ));
    }
    cert.sigma_min_witness = Some(sigma_min);

    let base_gram = left.gram_matrix();
    let base_inv = base_gram.try_inverse(pol)?;
    // ‖G_Φ⁻¹‖ ≤ 1/A_Φ.
    let gram_inv_norm = base_inv.operator_norm();
    if gram_inv_norm > (1.0 / left_class.lower) * (1.0 + 1e-9) {
        return Err(Error::violation(
            "‖G_Φ⁻¹‖ ≤ A_Φ⁻¹",
            gram_inv_norm - 1.0 / left_class.lower,
        ));
    }

    let synth_inv = left.synthesis().try_inverse(pol)?;
    let step = &LinearMap::identity(left.count()) - &(&(&synth_inv * u) * right.synthesis());
    let (series, terms) = power_series(&step, &base_inv);
    let direct = gram.matrix().try_inverse(pol)?;
    let residual = series.distance(&direct) / 1.0f64.max(direct.operator_norm());
    cert.series_residual = Some(residual);
    cert.series_terms = Some(terms);
    if residual > pol.equality_tolerance * 10.0 {
        return Err(Error::violation(
            "Neumann form of the Gram inverse",
            residual,
        ));
    }
    Ok(cert)
}

/// Joint perturbation of the operator and both frames.
pub fn joint_stability<R: Rng>(
    u: &LinearMap,
    v: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    left_perturbed: &FrameSystem,
    right_perturbed: &FrameSystem,
    budget: &StabilityBudget,
    pol: &TolerancePolicy,
    falsification_samples: usize,
    rng: &mut R,
) -> Result<StabilityCertificate> {
    if !left.classify(pol).is_frame() || !right.classify(pol).is_frame() {
        return Err(Error::pre("joint stability needs frames"));
    }
    let base = cross_gram(u, left, right)?;
    let base_inv = base
        .matrix()
        .try_inverse(pol)
        .map_err(|_| Error::Singular("the unperturbed Gram matrix must be invertible".into()))?;
    let u_inv = u
        .try_inverse(pol)
        .map_err(|_| Error::Singular("the anchor operator must be invertible".into()))?;

    let (a_phi, b_phi) = left.frame_bounds_with(pol)?;
    let (a_psi, b_psi) = right.frame_bounds_with(pol)?;
    let b_xi = left_perturbed.bessel_bound();
    let b_theta = right_perturbed.bessel_bound();
    let b_max = b_phi.max(b_psi).max(b_xi).max(b_theta);
    let a_min = a_phi.min(a_psi);
    let lambda = budget.lambda_total();
    let [l1, l2, l3, l4] = budget.lambda;
    let guard = pol.strict_guard();

    // Deterministic sufficient surrogate for the coefficient-wise hypothesis.
    let lhs_t = (right.synthesis() - right_perturbed.synthesis()).operator_norm()
        + (left.synthesis() - left_perturbed.synthesis()).operator_norm();
    let rhs_t = l1 * b_psi.sqrt() + l2 * b_theta.sqrt() + l3 * b_phi.sqrt() + l4 * b_xi.sqrt();

    // Randomized falsification of the coefficient-wise hypothesis itself.
    let mut violations = 0usize;
    for _ in 0..falsification_samples {
        let c = crate::sampling::random_coefficients(right.count(), rng);
        let syn_psi = right.synthesize(&c)?;
        let syn_theta = right_perturbed.synthesize(&c)?;
        let syn_phi = left.synthesize(&c)?;
        let syn_xi = left_perturbed.synthesize(&c)?;
        let lhs = (&syn_psi - &syn_theta).norm() + (&syn_phi - &syn_xi).norm();
        let rhs =
            l1 * syn_psi.norm() + l2 * syn_phi.norm() + l3 * syn_xi.norm() + l4 * syn_theta.norm();
        if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
            violations += 1;
        }
    }

    let mu_threshold = (a_psi * a_phi).sqrt() / (u_inv.operator_norm() * b_max);
    let checks = vec![
        BoundCheck::le(
            "‖T_Ψ−T_Θ‖+‖T_Φ−T_Ξ‖ ≤ λ₁√B_Ψ+λ₂√B_Θ+λ₃√B_Φ+λ₄√B_Ξ",
            lhs_t,
            rhs_t,
        ),
        BoundCheck::le(
            "sampled coefficient hypothesis violations = 0",
            violations as f64,
            0.0,
        ),
        BoundCheck::strict("‖U − V‖ < μ", u.distance(v), budget.mu, guard),
        BoundCheck::strict(
            "μ + 2‖U‖λ < √(A_Ψ A_Φ)/(‖U⁻¹‖ B)",
            budget.mu + 2.0 * u.operator_norm() * lambda,
            mu_threshold,
            guard,
        ),
        BoundCheck::strict(
            "λ(1 + 3√(B/A)) < 1",
            lambda * (1.0 + 3.0 * (b_max / a_min).sqrt()),
            1.0,
            guard,
        ),
    ];
    let mut cert = StabilityCertificate::new(
        "joint perturbation",
        checks,
        "G_{V,Ξ,Θ} is invertible and Ξ, Θ are Riesz bases",
    );

    // Intermediate norm bound: √(A_Ψ A_Φ)/‖U⁻¹‖ ≤ 1/‖G⁻¹‖, valid as soon as
    // the anchor Gram is invertible with spanning frames.
    let shart3_lhs = (a_psi * a_phi).sqrt() / u_inv.operator_norm();
    let shart3_rhs = 1.0 / base_inv.operator_norm();
    if shart3_lhs > shart3_rhs * (1.0 + 1e-9) {
        return Err(Error::violation(
            "√(A_Ψ A_Φ)/‖U⁻¹‖ ≤ 1/‖G⁻¹‖",
            shart3_lhs - shart3_rhs,
        ));
    }

    if !cert.verdict {
        return Ok(cert);
    }

    let perturbed = cross_gram(v, left_perturbed, right_perturbed)?;
    let (sigma_min, invertible) = gram_sigma_min(perturbed.matrix(), pol)?;
    if !invertible {
        return Err(Error::violation(
            "certified G_{V,Ξ,Θ} is singular",
            sigma_min,
        ));
    }
    cert.sigma_min_witness = Some(sigma_min);
    if !left_perturbed.classify(pol).is_riesz_basis()
        || !right_perturbed.classify(pol).is_riesz_basis()
    {
        return Err(Error::violation(
            "certified perturbed families must be Riesz bases",
            sigma_min,
        ));
    }
    Ok(cert)
}

/// One row of the convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    /// `‖Gₙ − G‖`.
    pub deviation: f64,
    /// The triangle-inequality chain bound for that step.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub all_within: bool,
}

/// Compares each `G_{Uₙ,Φⁿ,Ψⁿ}` against the limit Gram matrix and checks the
/// deviation against the norm chain
/// `‖T_{Φⁿ}*Uₙ‖·‖T_{Ψⁿ}−T_Ψ‖ + (‖T_{Φⁿ}−T_Φ‖·‖Uₙ‖ + ‖T_Φ‖·‖Uₙ−U‖)·‖T_Ψ‖`.
pub fn convergence_harness(
    sequence: &[(LinearMap, FrameSystem, FrameSystem)],
    limit: &(LinearMap, FrameSystem, FrameSystem),
) -> Result<ConvergenceTable> {
    let (u, left, right) = limit;
    let limit_gram = cross_gram(u, left, right)?;
    let mut rows = Vec::with_capacity(sequence.len());
    for (k, (u_n, left_n, right_n)) in sequence.iter().enumerate() {
        let gram_n = cross_gram(u_n, left_n, right_n)?;
        if gram_n.rows() != limit_gram.rows() || gram_n.cols() != limit_gram.cols() {
            return Err(Error::dim("sequence Gram shapes must match the limit"));
        }
        let deviation = gram_n.matrix().distance(limit_gram.matrix());
        let bound = (&left_n.analysis() * u_n).operator_norm()
            * (right_n.synthesis() - right.synthesis()).operator_norm()
            + ((left_n.synthesis() - left.synthesis()).operator_norm() * u_n.operator_norm()
                + left.synthesis().operator_norm() * u_n.distance(u))
                * right.synthesis().operator_norm();
        let within_bound = deviation <= bound * (1.0 + 1e-9) + 1e-14;
        rows.push(ConvergenceRow {
            index: k + 1,
            deviation,
            bound,
            within_bound,
        });
    }
    let all_within = rows.iter().all(|r| r.within_bound);
    Ok(ConvergenceTable { rows, all_within })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn neumann_scalar_series() {
        let u1 = LinearMap::from_real_diagonal(&[1.0]);
        let u2 = LinearMap::from_real_diagonal(&[0.5]);
        let out = neumann_inverse(&u1, &u2, &pol()).unwrap();
        // The adaptive stop guarantees a tail at most tol·‖sum‖ ≈ 2e-9.
        assert!((out.inverse.entry(0, 0).re - 2.0).abs() < 1e-8);
        assert!(out.converged);
    }

    #[test]
    fn neumann_identity_stops_immediately() {
        let eye = LinearMap::identity(2);
        let out = neumann_inverse(&eye, &eye, &pol()).unwrap();
        assert_eq!(out.terms, 1);
        assert!(out.inverse.distance_to_identity() < 1e-14);
    }

    #[test]
    fn neumann_matches_direct_inverse() {
        let u1 = LinearMap::identity(2);
        let bump = LinearMap::from_real_rows(2, 2, &[0.0, 0.3, 0.0, 0.0]).unwrap();
        let u2 = &u1 - &bump;
        let out = neumann_inverse(&u1, &u2, &pol()).unwrap();
        let direct = u2.try_inverse(&pol()).unwrap();
        assert!(out.inverse.distance(&direct) < 1e-9);
        assert!(out.truncation_bound >= out.inverse.distance(&direct) - 1e-12);
    }

    #[test]
    fn neumann_rejects_non_contraction() {
        let u1 = LinearMap::identity(2);
        let u2 = LinearMap::from_real_diagonal(&[3.0, 1.0]);
        assert!(matches!(
            neumann_inverse(&u1, &u2, &pol()),
            Err(Error::NotContractive { .. })
        ));
    }

    #[test]
    fn three_ops_identity_case() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let cert = stability_three_ops(&eye, &eye, &eye, &onb, &pol()).unwrap();
        assert!(cert.verdict);
        assert!(cert.sigma_min_witness.unwrap() > 0.9);
        assert!(cert.series_residual.unwrap() < 1e-10);
    }

    #[test]
    fn three_ops_scaled_middle() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let scaled = LinearMap::from_real_diagonal(&[1.05, 1.05]);
        let cert = stability_three_ops(&eye, &scaled, &eye, &onb, &pol()).unwrap();
        assert!(cert.verdict);
        assert!((cert.checks[0].lhs - 0.05).abs() < 1e-12);
        // Series inverse of 1.05·I is (1/1.05)·I ≈ 0.95238·I.
        assert!(cert.series_residual.unwrap() < 1e-9);
    }

    #[test]
    fn three_ops_violated_bound_is_inconclusive() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let big = LinearMap::from_real_diagonal(&[3.0, 3.0]);
        let cert = stability_three_ops(&eye, &big, &eye, &onb, &pol()).unwrap();
        assert!(!cert.verdict);
        assert!(cert.sigma_min_witness.is_none());
    }

    #[test]
    fn factor_examples() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let cert = stability_factor(&eye, &eye, &onb, &pol()).unwrap();
        assert!(cert.verdict);

        let u1 = LinearMap::from_real_diagonal(&[2.0, 1.0]);
        let u2 = LinearMap::from_real_rows(2, 2, &[1.0, 0.05, 0.0, 1.0]).unwrap();
        let cert = stability_factor(&u1, &u2, &onb, &pol()).unwrap();
        if cert.verdict {
            assert!(cert.series_residual.unwrap() < 1e-9);
            assert!(cert.sigma_min_witness.unwrap() > 0.0);
        }

        let far = LinearMap::from_real_diagonal(&[5.0, 5.0]);
        let cert = stability_factor(&u1, &far, &onb, &pol()).unwrap();
        assert!(!cert.verdict);
    }

    #[test]
    fn perturb_certificates_examples() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let v = LinearMap::from_real_diagonal(&[1.5, 1.5]);
        let [c1, c2, c3] = perturb_certificates(&eye, &v, &onb, &onb, &onb, &onb, &pol()).unwrap();
        assert!(c1.verdict, "‖U−V‖ = 0.5 < 1");
        assert!(c2.verdict, "zero frame perturbation");
        assert!(c3.verdict);
        assert!((c1.checks[0].lhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perturb_boundary_is_inconclusive() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        // Right-frame perturbation with norm exactly at the threshold 1.
        let theta =
            FrameSystem::from_vectors(2, &[vec![c(1.0), c(1.0)], vec![c(0.0), c(1.0)]]).unwrap();
        let [_, c2, _] =
            perturb_certificates(&eye, &eye, &onb, &onb, &onb, &theta, &pol()).unwrap();
        assert!((c2.checks[0].lhs - 1.0).abs() < 1e-12);
        assert!((c2.checks[0].rhs - 1.0).abs() < 1e-12);
        assert!(!c2.verdict, "strict inequality at the boundary");
    }

    #[test]
    fn riesz_perturbation_examples() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let cert = riesz_perturbation(&eye, &onb, &onb, &pol()).unwrap();
        assert!(cert.verdict);

        let tilted =
            FrameSystem::from_vectors(2, &[vec![c(1.0), c(0.0)], vec![c(0.5), c(1.0)]]).unwrap();
        let cert = riesz_perturbation(&eye, &onb, &tilted, &pol()).unwrap();
        assert!((cert.checks[0].lhs - 0.25).abs() < 1e-12);
        assert!(cert.verdict);
        assert!(cert.series_residual.unwrap() < 1e-9);

        let far =
            FrameSystem::from_vectors(2, &[vec![c(1.0), c(2.0)], vec![c(2.0), c(1.0)]]).unwrap();
        let cert = riesz_perturbation(&eye, &onb, &far, &pol()).unwrap();
        assert!(!cert.verdict);

        let not_riesz = FrameSystem::from_vectors(
            2,
            &[
                vec![c(1.0), c(0.0)],
                vec![c(1.0), c(0.0)],
                vec![c(0.0), c(1.0)],
            ],
        )
        .unwrap();
        assert!(riesz_perturbation(&eye, &not_riesz, &onb, &pol()).is_err());
    }

    #[test]
    fn joint_stability_zero_perturbation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        use rand::SeedableRng;
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let budget = StabilityBudget::new([0.0; 4], 0.01).unwrap();
        let cert = joint_stability(
            &eye,
            &eye,
            &onb,
            &onb,
            &onb,
            &onb,
            &budget,
            &pol(),
            200,
            &mut rng,
        )
        .unwrap();
        assert!(cert.verdict, "checks: {:?}", cert.checks);
        assert!(cert.sigma_min_witness.unwrap() > 0.9);
    }

    #[test]
    fn joint_stability_small_perturbation() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let v = LinearMap::from_rows(2, 2, &[c(1.0), Complex64::new(0.0, 0.01), c(0.0), c(1.0)])
            .unwrap();
        let xi =
            FrameSystem::from_vectors(2, &[vec![c(1.0), c(0.01)], vec![c(0.0), c(1.0)]]).unwrap();
        let budget = StabilityBudget::new([0.02; 4], 0.02).unwrap();
        let cert = joint_stability(
            &eye,
            &v,
            &onb,
            &onb,
            &xi,
            &onb,
            &budget,
            &pol(),
            500,
            &mut rng,
        )
        .unwrap();
        assert!(cert.verdict, "checks: {:?}", cert.checks);
        assert!(cert.sigma_min_witness.unwrap() > 0.0);
    }

    #[test]
    fn joint_stability_infeasible_budget_is_inconclusive() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        // λ(1+3√(B/A)) = 0.3·4 = 1.2 ≥ 1 regardless of the other checks.
        let budget = StabilityBudget::new([0.075; 4], 0.01).unwrap();
        let cert = joint_stability(
            &eye,
            &eye,
            &onb,
            &onb,
            &onb,
            &onb,
            &budget,
            &pol(),
            50,
            &mut rng,
        )
        .unwrap();
        assert!(!cert.verdict);
    }

    #[test]
    fn budget_rejects_negative_entries() {
        assert!(StabilityBudget::new([0.1, -0.1, 0.0, 0.0], 0.1).is_err());
        assert!(StabilityBudget::new([0.1; 4], f64::NAN).is_err());
    }

    #[test]
    fn convergence_constant_sequence_is_zero() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let limit = (eye.clone(), onb.clone(), onb.clone());
        let seq: Vec<_> = (0..5).map(|_| limit.clone()).collect();
        let table = convergence_harness(&seq, &limit).unwrap();
        assert!(table.all_within);
        assert!(table.rows.iter().all(|r| r.deviation == 0.0));
    }

    #[test]
    fn convergence_shrinking_frame_noise() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let noise = LinearMap::from_real_rows(2, 2, &[0.3, -0.1, 0.2, 0.4]).unwrap();
        let seq: Vec<_> = (1..=30)
            .map(|n| {
                let bump = noise.scale(Complex64::new(1.0 / n as f64, 0.0));
                let left = FrameSystem::from_synthesis(onb.synthesis() + &bump).unwrap();
                let right = FrameSystem::from_synthesis(onb.synthesis() - &bump).unwrap();
                (eye.clone(), left, right)
            })
            .collect();
        let table = convergence_harness(&seq, &(eye.clone(), onb.clone(), onb.clone())).unwrap();
        assert!(table.all_within);
        assert!(table.rows.last().unwrap().deviation < table.rows[0].deviation);
    }

    #[test]
    fn convergence_shrinking_operator_noise() {
        let onb = FrameSystem::standard(2);
        let eye = LinearMap::identity(2);
        let noise = LinearMap::from_real_rows(2, 2, &[0.0, 1.0, -0.5, 0.0]).unwrap();
        let seq: Vec<_> = (1..=20)
            .map(|n| {
                let scaled = noise.scale(Complex64::new(1.0 / n as f64, 0.0));
                (&eye + &scaled, onb.clone(), onb.clone())
            })
            .collect();
        let table = convergence_harness(&seq, &(eye, onb.clone(), onb)).unwrap();
        assert!(table.all_within);
        for w in table.rows.windows(2) {
            assert!(w[1].deviation <= w[0].deviation + 1e-12);
        }
    }
}
