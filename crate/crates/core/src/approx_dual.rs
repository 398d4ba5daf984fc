//! Approximate duality certificates: the defining defect, sufficient
//! conditions expressed through cross Gram matrices, the necessary bound for
//! Riesz bases, and construction of the corrected exact dual.

use num_complex::Complex64;
use serde::Serialize;

use crate::certificate::{BoundCheck, Certificate};
use crate::error::{Error, Result};
use crate::frame::FrameSystem;
use crate::gram::{compose, cross_gram, cross_gram_pair};
use crate::matrix::LinearMap;
use crate::tolerance::TolerancePolicy;

/// `‖I − T_Φ T_Ψ*‖`: below one means the pair is approximately dual.
pub fn approx_dual_defect(left: &FrameSystem, right: &FrameSystem) -> Result<f64> {
    if left.dim() != right.dim() || left.count() != right.count() {
        return Err(Error::dim(format!(
            "defect needs matching shapes: ({}, {}) vs ({}, {})",
            left.dim(),
            left.count(),
            right.dim(),
            right.count()
        )));
    }
    let eye = LinearMap::identity(left.dim());
    Ok((&eye - &(left.synthesis() * &right.analysis())).operator_norm())
}

/// One evaluated sufficient condition, in the better of its two orientations.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    /// Which orientation won: false = as stated, true = roles switched.
    pub switched: bool,
    pub lhs: f64,
    pub threshold: f64,
    pub satisfied: bool,
    /// Which pair the condition certifies.
    pub target: String,
    /// Measured defect of that pair.
    pub implied_defect: f64,
    /// `satisfied ⇒ implied_defect < 1`, verified.
    pub sound: bool,
}

/// Certificate for approximate duality of `(Φ, Ψ)` given verified duals.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxDualCertificate {
    /// `‖I − T_Φ T_Ψ*‖` of the primal pair.
    pub defect: f64,
    pub conditions: Vec<ConditionCheck>,
    /// True iff some condition targeting the primal pair passed and the
    /// measured defect is below one.
    pub conclusion: bool,
}

struct Orientation<'a> {
    left: &'a FrameSystem,
    right: &'a FrameSystem,
    left_dual: &'a FrameSystem,
    right_dual: &'a FrameSystem,
    switched: bool,
}

fn check_condition(
    name: &str,
    target: &str,
    evaluate: impl Fn(&Orientation) -> Result<(f64, f64, f64)>,
    orientations: &[Orientation],
    guard: f64,
) -> Result<ConditionCheck> {
    let mut best: Option<ConditionCheck> = None;
    for orientation in orientations {
        let (lhs, threshold, implied_defect) = evaluate(orientation)?;
        let satisfied = BoundCheck::strict("", lhs, threshold, guard).holds;
        let sound = !satisfied || implied_defect < 1.0;
        let candidate = ConditionCheck {
            name: name.into(),
            switched: orientation.switched,
            lhs,
            threshold,
            satisfied,
            target: target.into(),
            implied_defect,
            sound,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let ratio_new = candidate.lhs / candidate.threshold.max(1e-300);
                let ratio_old = b.lhs / b.threshold.max(1e-300);
                ratio_new < ratio_old
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one orientation"))
}

/// Evaluates the three Gram-matrix sufficient conditions for approximate
/// duality, each in both orientations (roles of the primal and dual pairs
/// switched), reporting the better orientation. Every satisfied condition
/// has its implied defect measured; a satisfied condition with defect ≥ 1
/// is a soundness violation and errors out.
pub fn sufficient_conditions(
    left: &FrameSystem,
    right: &FrameSystem,
    left_dual: &FrameSystem,
    right_dual: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<ApproxDualCertificate> {
    if !left.is_dual_pair(left_dual, pol)?.verdict {
        return Err(Error::pre("left dual fails verification"));
    }
    if !right.is_dual_pair(right_dual, pol)?.verdict {
        return Err(Error::pre("right dual fails verification"));
    }
    let defect = approx_dual_defect(left, right)?;
    let guard = pol.strict_guard();

    let orientations = [
        Orientation {
            left,
            right,
            left_dual,
            right_dual,
            switched: false,
        },
        Orientation {
            left: right,
            right: left,
            left_dual: right_dual,
            right_dual: left_dual,
            switched: true,
        },
    ];

    let mut conditions = Vec::new();

    // (1): ‖I − G_{Ψ,Φ}‖ < 1/√(B_Φ B_Φᵈ) certifies the primal pair.
    conditions.push(check_condition(
        "‖I − G_{Ψ,Φ}‖ < 1/√(B_Φ B_Φᵈ)",
        "primal",
        |o| {
            let g = cross_gram_pair(o.right, o.left)?;
            let lhs = g.matrix().distance_to_identity();
            let threshold = 1.0 / (o.left.bessel_bound() * o.left_dual.bessel_bound()).sqrt();
            Ok((lhs, threshold, approx_dual_defect(o.left, o.right)?))
        },
        &orientations,
        guard,
    )?);

    // (2): ‖I − G_{Φ,Ψ}‖ < 1/√(B_Φᵈ B_Ψᵈ) certifies the dual pair.
    conditions.push(check_condition(
        "‖I − G_{Φ,Ψ}‖ < 1/√(B_Φᵈ B_Ψᵈ)",
        "duals",
        |o| {
            let g = cross_gram_pair(o.left, o.right)?;
            let lhs = g.matrix().distance_to_identity();
            let threshold = 1.0 / (o.left_dual.bessel_bound() * o.right_dual.bessel_bound()).sqrt();
            Ok((
                lhs,
                threshold,
                approx_dual_defect(o.left_dual, o.right_dual)?,
            ))
        },
        &orientations,
        guard,
    )?);

    // (3): ‖I − G_{Φ,Ψ}‖ < 1/√(B_Φ B_Φᵈ) certifies the primal pair.
    conditions.push(check_condition(
        "‖I − G_{Φ,Ψ}‖ < 1/√(B_Φ B_Φᵈ)",
        "primal",
        |o| {
            let g = cross_gram_pair(o.left, o.right)?;
            let lhs = g.matrix().distance_to_identity();
            let threshold = 1.0 / (o.left.bessel_bound() * o.left_dual.bessel_bound()).sqrt();
            Ok((lhs, threshold, approx_dual_defect(o.left, o.right)?))
        },
        &orientations,
        guard,
    )?);

    for c in &conditions {
        if !c.sound {
            return Err(Error::violation(
                format!(
                    "condition {:?} passed but the implied defect is ≥ 1",
                    c.name
                ),
                c.implied_defect,
            ));
        }
    }

    let conclusion = conditions
        .iter()
        .any(|c| c.target == "primal" && c.satisfied)
        && defect < 1.0;

    Ok(ApproxDualCertificate {
        defect,
        conditions,
        conclusion,
    })
}

/// The right-inverse composite condition: with `UV = I`,
/// `‖I − G_{U,Ψ,Φ} G_{V,Φᵈ,Φ}‖ < 1/√(B_Φ B_Φᵈ)` certifies the primal pair.
/// The composite identity `G_{U,Ψ,Φ} G_{V,Φᵈ,Φ} = G_{Ψ,Φ}` from the proof is
/// verified as a separate check line.
pub fn right_inverse_condition(
    u: &LinearMap,
    v: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    left_dual: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<ApproxDualCertificate> {
    let eye = LinearMap::identity(u.rows());
    let right_inverse_residual = (&(u * v) - &eye).operator_norm();
    if right_inverse_residual > pol.equality_tolerance {
        return Err(Error::pre(format!(
            "V is not a right inverse of U (‖UV − I‖ = {right_inverse_residual:.3e})"
        )));
    }
    if !left.is_dual_pair(left_dual, pol)?.verdict {
        return Err(Error::pre("left dual fails verification"));
    }

    let g1 = cross_gram(u, right, left)?; // G_{U,Ψ,Φ}
    let g2 = cross_gram(v, left_dual, left)?; // G_{V,Φᵈ,Φ}
    let product = compose(&g1, &g2, pol)?;
    let lhs = product.matrix().distance_to_identity();
    let threshold = 1.0 / (left.bessel_bound() * left_dual.bessel_bound()).sqrt();
    let satisfied = BoundCheck::strict("", lhs, threshold, pol.strict_guard()).holds;

    let plain = cross_gram_pair(right, left)?;
    let composite_residual = product.matrix().distance(plain.matrix());
    let composite_ok =
        composite_residual <= pol.equality_tolerance * (1.0 + plain.matrix().operator_norm());
    if !composite_ok {
        return Err(Error::violation(
            "composite identity G_{U,Ψ,Φ} G_{V,Φᵈ,Φ} = G_{Ψ,Φ}",
            composite_residual,
        ));
    }

    let defect = approx_dual_defect(left, right)?;
    let sound = !satisfied || defect < 1.0;
    if !sound {
        return Err(Error::violation(
            "right-inverse condition passed but the defect is ≥ 1",
            defect,
        ));
    }

    Ok(ApproxDualCertificate {
        defect,
        conditions: vec![ConditionCheck {
            name: "‖I − G_{U,Ψ,Φ} G_{V,Φᵈ,Φ}‖ < 1/√(B_Φ B_Φᵈ)".into(),
            switched: false,
            lhs,
            threshold,
            satisfied,
            target: "primal".into(),
            implied_defect: defect,
            sound,
        }],
        conclusion: satisfied && defect < 1.0,
    })
}

/// Necessary bound for approximate duals of Riesz bases:
/// `‖I − G_{Φ,Ψ}‖ < √(B_Φ B_Ψ / (A_Φ A_Ψ))`.
pub fn necessary_bound(
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<Certificate> {
    let defect = approx_dual_defect(left, right)?;
    if defect >= 1.0 {
        return Err(Error::pre(format!(
            "not approximate duals (defect {defect:.6}); the bound does not apply"
        )));
    }
    let left_class = left.classify(pol);
    let right_class = right.classify(pol);
    if !left_class.is_riesz_basis() || !right_class.is_riesz_basis() {
        return Err(Error::pre("the necessary bound needs Riesz bases"));
    }
    let g = cross_gram_pair(left, right)?;
    let lhs = g.matrix().distance_to_identity();
    let rhs =
        ((left_class.upper * right_class.upper) / (left_class.lower * right_class.lower)).sqrt();
    let check = BoundCheck::strict("‖I − G_{Φ,Ψ}‖ < √(B_Φ B_Ψ/(A_Φ A_Ψ))", lhs, rhs, 0.0);
    if !check.holds {
        return Err(Error::violation(
            "necessary bound for approximate duals of Riesz bases",
            lhs - rhs,
        ));
    }
    Ok(Certificate::new(
        "approximate-dual necessary bound",
        vec![check],
        "consistent with the pair being approximate duals",
    ))
}

/// Corrects an approximate dual into an exact one: `(T_Ψ T_Φ*)⁻¹ Ψ`.
///
/// Requires defect < 1 so the mixed frame operator is invertible; the
/// output is verified to be an exact dual of `Φ`.
pub fn corrected_dual(
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<FrameSystem> {
    let defect = approx_dual_defect(left, right)?;
    if defect >= 1.0 {
        return Err(Error::pre(format!(
            "defect {defect:.6} is not below 1; the mixed operator may be singular"
        )));
    }
    let mixed = right.synthesis() * &left.analysis(); // T_Ψ T_Φ*
    let inv = mixed.try_inverse(pol)?;
    let corrected = right.transform(&inv)?;
    let cert = corrected.is_dual_pair(left, pol)?;
    if !cert.verdict {
        return Err(Error::violation(
            "corrected dual fails exact duality",
            cert.checks[0].lhs,
        ));
    }
    Ok(corrected)
}

/// Scales a frame by a real factor (test and construction helper).
pub fn scaled(frame: &FrameSystem, factor: f64) -> FrameSystem {
    frame.scale(Complex64::new(factor, 0.0))
}
