//! Invertibility and pseudo-inversion of cross Gram matrices: Riesz
//! structure forced by invertibility, inverse and pseudo-inverse
//! representations as cross Gram matrices of dual frames, the special duals
//! those representations need, range conditions, and image-frame identities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{FrameClass, FrameSystem};
use crate::gram::cross_gram;
use crate::matrix::{kernel_distance, range_distance, LinearMap};
use crate::tolerance::TolerancePolicy;

/// Condition numbers above this make 1e-9-level residual checks meaningless
/// in double precision; identity failures are then reported, not escalated.
fn residuals_reliable(condition: f64, pol: &TolerancePolicy) -> bool {
    condition.is_finite() && condition <= pol.equality_tolerance / (64.0 * f64::EPSILON)
}

fn rel_residual(target: &LinearMap, candidate: &LinearMap) -> f64 {
    target.distance(candidate) / 1.0f64.max(target.operator_norm())
}

/// Which of the two special-dual constructions is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualSide {
    /// `Φ^{(U,Ψ)} = {U T_Ψ G† δᵢ}`, a dual of the left frame on `R(U)`.
    PhiSide,
    /// `Ψ^{(U,Φ)} = {U* T_Φ (G†)* δᵢ}`, a dual of the right frame on `R(U*)`.
    PsiSide,
}

/// A dual frame constructed from the pseudo-inverse of a cross Gram matrix,
/// together with the witnesses that it really is one.
#[derive(Clone, Debug)]
pub struct SpecialDual {
    pub frame: FrameSystem,
    pub kind: DualSide,
    /// `‖T_new T_base* π − π‖` with π the projector onto the asserted
    /// subspace (the full space when `U` is invertible).
    pub duality_residual: f64,
    /// Whether duality was asserted on the full space (true) or only on the
    /// range of `U` (respectively `U*`).
    pub full_space: bool,
    /// Projector distance for the kernel identity: `ker T_new = ker T_base`
    /// when `U` is invertible, else `ker(U† T_new) = ker(U* T_base)` (and its
    /// adjoint analogue on the psi side).
    pub kernel_residual: f64,
    /// The `G†` used in the construction.
    pub gram_pinv: LinearMap,
}

/// Builds the special dual that carries the pseudo-inverse representation.
///
/// Both frames must be frames for the ambient space. The construction is a
/// dual of the base frame on the range of `U` (full space for invertible
/// `U`); a duality residual above tolerance is a defect and errors out with
/// the relevant range-condition value attached.
pub fn special_dual(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    side: DualSide,
    pol: &TolerancePolicy,
) -> Result<SpecialDual> {
    if !left.classify(pol).is_frame() {
        return Err(Error::pre("left family is not a frame"));
    }
    if !right.classify(pol).is_frame() {
        return Err(Error::pre("right family is not a frame"));
    }
    let gram = cross_gram(u, left, right)?;
    let g_svd = gram.matrix().svd_with(pol)?;
    let g_pinv = g_svd.pseudo_inverse();

    let u_svd = u.svd_with(pol)?;
    let u_invertible = u.is_square()
        && u_svd.rank() == u.rows()
        && u_svd.condition_number() <= pol.condition_limit;
    let u_pinv = u_svd.pseudo_inverse();

    let (synthesis, base, projector) = match side {
        DualSide::PhiSide => (
            &(u * right.synthesis()) * &g_pinv,
            left,
            u_svd.range_projector(),
        ),
        DualSide::PsiSide => (
            &(&u.adjoint() * left.synthesis()) * &g_pinv.adjoint(),
            right,
            u.adjoint().range_projector(pol)?,
        ),
    };
    let frame = FrameSystem::from_synthesis(synthesis)?;

    // Duality on the asserted subspace: T_new T_base* π = π.
    let composite = &(frame.synthesis() * &base.analysis()) * &projector;
    let duality_residual = composite.distance(&projector);
    if duality_residual > pol.equality_tolerance {
        let side_name = match side {
            DualSide::PhiSide => "psi",
            DualSide::PsiSide => "phi",
        };
        let condition = match side {
            DualSide::PhiSide => range_condition(u, right, RangeSide::Psi, pol)?,
            DualSide::PsiSide => range_condition(u, left, RangeSide::Phi, pol)?,
        };
        return Err(Error::violation(
            format!(
                "special dual fails the duality identity (range condition {side_name} = {condition})"
            ),
            duality_residual,
        ));
    }

    let kernel_residual = if u_invertible {
        kernel_distance(frame.synthesis(), base.synthesis(), pol)?
    } else {
        match side {
            DualSide::PhiSide => kernel_distance(
                &(&u_pinv * frame.synthesis()),
                &(&u.adjoint() * base.synthesis()),
                pol,
            )?,
            DualSide::PsiSide => kernel_distance(
                &(&u_pinv.adjoint() * frame.synthesis()),
                &(u * base.synthesis()),
                pol,
            )?,
        }
    };

    Ok(SpecialDual {
        frame,
        kind: side,
        duality_residual,
        full_space: u_invertible,
        kernel_residual,
        gram_pinv: g_pinv,
    })
}

/// Invertibility analysis of a square cross Gram matrix.
#[derive(Clone, Debug, Serialize)]
pub struct InversionReport {
    pub invertible: bool,
    pub condition_number: f64,
    pub left_class: FrameClass,
    pub right_class: FrameClass,
    /// `σ_min(T_Φ)` and its guaranteed lower bound `1/(√B_Ψ ‖G⁻¹‖ ‖U‖)`.
    pub sigma_min_left: f64,
    pub lower_bound_left: f64,
    pub sigma_min_right: f64,
    pub lower_bound_right: f64,
    pub spanning_both: bool,
    pub u_invertible: Option<bool>,
    /// `‖G⁻¹ − G_{U⁻¹,Ψ̃,Φ̃}‖ / ‖G⁻¹‖` when both frames span.
    pub inverse_residual: Option<f64>,
    pub theorem_ok: bool,
    pub residuals_reliable: bool,
}

/// Checks invertibility of `G_{U,Φ,Ψ}` and everything it forces: both
/// families are Riesz sequences with explicit `σ_min` lower bounds, and for
/// spanning families `U` is invertible with `G⁻¹ = G_{U⁻¹,Ψ̃,Φ̃}`.
pub fn invert_gram(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<InversionReport> {
    let gram = cross_gram(u, left, right)?;
    if !gram.matrix().is_square() {
        return Err(Error::dim(format!(
            "inversion needs a square Gram matrix, got {}x{}",
            gram.rows(),
            gram.cols()
        )));
    }
    let g_svd = gram.matrix().svd_with(pol)?;
    let condition_number = g_svd.condition_number();
    let invertible = g_svd.rank() == gram.rows() && condition_number <= pol.condition_limit;
    let reliable = residuals_reliable(condition_number, pol);

    let left_class = left.classify(pol);
    let right_class = right.classify(pol);

    if !invertible {
        return Ok(InversionReport {
            invertible: false,
            condition_number,
            left_class,
            right_class,
            sigma_min_left: 0.0,
            lower_bound_left: 0.0,
            sigma_min_right: 0.0,
            lower_bound_right: 0.0,
            spanning_both: left_class.spanning && right_class.spanning,
            u_invertible: None,
            inverse_residual: None,
            theorem_ok: true,
            residuals_reliable: reliable,
        });
    }

    let g_inv = g_svd.pseudo_inverse();
    let g_inv_norm = g_inv.operator_norm();
    let u_norm = u.operator_norm();

    let sigma_min_left = left.synthesis_singular_values().min();
    let sigma_min_right = right.synthesis_singular_values().min();
    let lower_bound_left = 1.0 / (right.bessel_bound().sqrt() * g_inv_norm * u_norm);
    let lower_bound_right = 1.0 / (left.bessel_bound().sqrt() * g_inv_norm * u_norm);

    let bound_slack = 1.0 - 1e-6;
    let mut ok = left_class.is_riesz_sequence()
        && right_class.is_riesz_sequence()
        && sigma_min_left >= lower_bound_left * bound_slack
        && sigma_min_right >= lower_bound_right * bound_slack;

    let spanning_both = left_class.spanning && right_class.spanning;
    let mut u_invertible = None;
    let mut inverse_residual = None;
    if spanning_both {
        let u_inv_ok = u.is_invertible(pol);
        u_invertible = Some(u_inv_ok);
        ok &= u_inv_ok;
        if u_inv_ok {
            let u_inv = u.try_inverse(pol)?;
            let formula = cross_gram(
                &u_inv,
                &right.canonical_dual_with(pol)?,
                &left.canonical_dual_with(pol)?,
            )?;
            let res = g_inv.distance(formula.matrix()) / g_inv_norm.max(1e-300);
            inverse_residual = Some(res);
            ok &= res <= pol.equality_tolerance;
        }
    }

    if !ok && reliable {
        return Err(Error::violation(
            "invertible Gram matrix without the guaranteed Riesz/inverse structure",
            inverse_residual.unwrap_or(f64::NAN),
        ));
    }

    Ok(InversionReport {
        invertible: true,
        condition_number,
        left_class,
        right_class,
        sigma_min_left,
        lower_bound_left,
        sigma_min_right,
        lower_bound_right,
        spanning_both,
        u_invertible,
        inverse_residual,
        theorem_ok: ok,
        residuals_reliable: reliable,
    })
}

/// Consequences of one-sided invertibility of the Gram matrix.
#[derive(Clone, Debug, Serialize)]
pub struct OneSidedReport {
    pub right_invertible: bool,
    pub left_invertible: bool,
    /// On right invertibility: Φ and U*Φ are Riesz sequences.
    pub left_family_riesz: Option<bool>,
    pub ustar_left_riesz: Option<bool>,
    /// ... and when Φ spans, Φ is a Riesz basis and UΨ a frame.
    pub left_family_riesz_basis: Option<bool>,
    pub u_right_frame: Option<bool>,
    /// On left invertibility: Ψ and UΨ are Riesz sequences.
    pub right_family_riesz: Option<bool>,
    pub u_right_riesz: Option<bool>,
    pub right_family_riesz_basis: Option<bool>,
    pub ustar_left_frame: Option<bool>,
    pub theorem_ok: bool,
}

/// Detects numeric surjectivity/injectivity of `G_{U,Φ,Ψ}` and verifies the
/// Riesz-sequence conclusions they force.
pub fn one_sided_diagnosis(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<OneSidedReport> {
    let gram = cross_gram(u, left, right)?;
    let g_svd = gram.matrix().svd_with(pol)?;
    let rank = g_svd.rank();
    let right_invertible = rank == gram.rows() && gram.rows() > 0;
    let left_invertible = rank == gram.cols() && gram.cols() > 0;

    let mut report = OneSidedReport {
        right_invertible,
        left_invertible,
        left_family_riesz: None,
        ustar_left_riesz: None,
        left_family_riesz_basis: None,
        u_right_frame: None,
        right_family_riesz: None,
        u_right_riesz: None,
        right_family_riesz_basis: None,
        ustar_left_frame: None,
        theorem_ok: true,
    };

    if right_invertible {
        let left_class = left.classify(pol);
        let ustar_left = left.transform(&u.adjoint())?;
        report.left_family_riesz = Some(left_class.is_riesz_sequence());
        report.ustar_left_riesz = Some(ustar_left.classify(pol).is_riesz_sequence());
        if left_class.spanning {
            let u_right = right.transform(u)?;
            report.left_family_riesz_basis = Some(left_class.is_riesz_basis());
            report.u_right_frame = Some(u_right.classify(pol).is_frame());
        }
    }
    if left_invertible {
        let right_class = right.classify(pol);
        let u_right = right.transform(u)?;
        report.right_family_riesz = Some(right_class.is_riesz_sequence());
        report.u_right_riesz = Some(u_right.classify(pol).is_riesz_sequence());
        if right_class.spanning {
            let ustar_left = left.transform(&u.adjoint())?;
            report.right_family_riesz_basis = Some(right_class.is_riesz_basis());
            report.ustar_left_frame = Some(ustar_left.classify(pol).is_frame());
        }
    }

    report.theorem_ok = [
        report.left_family_riesz,
        report.ustar_left_riesz,
        report.left_family_riesz_basis,
        report.u_right_frame,
        report.right_family_riesz,
        report.u_right_riesz,
        report.right_family_riesz_basis,
        report.ustar_left_frame,
    ]
    .iter()
    .all(|flag| flag.unwrap_or(true));
    Ok(report)
}

/// Which range-invariance condition to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RangeSide {
    /// `R(U*) = S_F R(U*)` — gates the left-side (phi) representations.
    Psi,
    /// `R(U) = S_F R(U)` — gates the right-side (psi) representations.
    Phi,
}

/// Frame-operator invariance of the relevant range.
pub fn range_condition(
    u: &LinearMap,
    family: &FrameSystem,
    side: RangeSide,
    pol: &TolerancePolicy,
) -> Result<bool> {
    let s = family.frame_operator();
    match side {
        RangeSide::Psi => {
            let ustar = u.adjoint();
            crate::matrix::range_equal(&ustar, &(s * &ustar), pol)
        }
        RangeSide::Phi => crate::matrix::range_equal(u, &(s * u), pol),
    }
}

/// One candidate identity for `G†` (or a kernel/range identity), with its
/// measured residual and whether the hypotheses guarantee it.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentationCheck {
    pub name: String,
    pub residual: f64,
    pub holds: bool,
    pub guaranteed: bool,
}

/// Pseudo-inversion of a cross Gram matrix with every representation the
/// range conditions entitle.
#[derive(Clone, Debug, Serialize)]
pub struct PinvGramReport {
    pub pinv: LinearMap,
    pub u_invertible: bool,
    /// `R(U*) = S_Ψ R(U*)`.
    pub range_condition_psi: bool,
    /// `R(U) = S_Φ R(U)`.
    pub range_condition_phi: bool,
    pub representations: Vec<RepresentationCheck>,
    pub kernel_range_checks: Vec<RepresentationCheck>,
    pub phi_dual: FrameSystem,
    pub psi_dual: FrameSystem,
    pub rank_reliable: bool,
    pub all_guaranteed_hold: bool,
}

/// Computes `G†` by SVD and compares it against the cross-Gram
/// representations built from canonical and special duals. A guaranteed
/// representation that misses is a hard failure; an unguaranteed one is
/// reported as "representation not guaranteed".
pub fn pinv_gram(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<PinvGramReport> {
    if !left.classify(pol).is_frame() || !right.classify(pol).is_frame() {
        return Err(Error::pre("pseudo-inverse representations need frames"));
    }
    let gram = cross_gram(u, left, right)?;
    let g_svd = gram.matrix().svd_with(pol)?;
    let g_pinv = g_svd.pseudo_inverse();
    let rank_reliable = !g_svd.rank_is_ambiguous() && !u.svd_with(pol)?.rank_is_ambiguous();

    let u_svd = u.svd_with(pol)?;
    let u_invertible = u.is_square()
        && u_svd.rank() == u.rows()
        && u_svd.condition_number() <= pol.condition_limit;
    let u_pinv = u_svd.pseudo_inverse();

    let rc_psi = range_condition(u, right, RangeSide::Psi, pol)?;
    let rc_phi = range_condition(u, left, RangeSide::Phi, pol)?;

    let psi_tilde = right.canonical_dual_with(pol)?;
    let phi_tilde = left.canonical_dual_with(pol)?;
    let phi_special = special_dual(u, left, right, DualSide::PhiSide, pol)?;
    let psi_special = special_dual(u, left, right, DualSide::PsiSide, pol)?;

    // Canonical duals of the projected families, taken on the range of U
    // (respectively U*): the pseudo-inverse of the frame operator restricts
    // the inversion to the span.
    let projected_left = left.transform(&u_svd.range_projector())?; // UU†Φ
    let projected_left_dual = projected_left.canonical_dual_with(pol)?;
    let projected_right = right.transform(&(&u_pinv * u))?; // U†UΨ
    let projected_right_dual = projected_right.canonical_dual_with(pol)?;

    let candidates = [
        (
            "G† = G_{U†, Ψ̃, Φ^{(U,Ψ)}}",
            cross_gram(&u_pinv, &psi_tilde, &phi_special.frame)?,
            rc_psi,
        ),
        (
            "G† = G_{U†, Ψ̃, (UU†Φ)~}",
            cross_gram(&u_pinv, &psi_tilde, &projected_left_dual)?,
            rc_psi,
        ),
        (
            "G† = G_{U†, Ψ^{(U,Φ)}, Φ̃}",
            cross_gram(&u_pinv, &psi_special.frame, &phi_tilde)?,
            rc_phi,
        ),
        (
            "G† = G_{U†, (U†UΨ)~, Φ̃}",
            cross_gram(&u_pinv, &projected_right_dual, &phi_tilde)?,
            rc_phi,
        ),
    ];

    let mut representations = Vec::new();
    for (name, candidate, guaranteed) in candidates {
        let residual = rel_residual(&g_pinv, candidate.matrix());
        let holds = residual <= pol.equality_tolerance;
        if guaranteed && !holds && rank_reliable {
            return Err(Error::violation(name, residual));
        }
        representations.push(RepresentationCheck {
            name: name.into(),
            residual,
            holds,
            guaranteed,
        });
    }

    // Kernel/range identities of G†, unconditional.
    let mut kernel_range_checks = Vec::new();
    let ustar_tphi = &u.adjoint() * left.synthesis();
    let tpsi_star_ustar = (u * right.synthesis()).adjoint();
    let pairs: Vec<(&str, f64)> = if u_invertible {
        vec![
            (
                "ker G† = ker T_Φ",
                kernel_distance(&g_pinv, left.synthesis(), pol)?,
            ),
            (
                "ran G† = ran T_Ψ*",
                range_distance(&g_pinv, &right.analysis(), pol)?,
            ),
        ]
    } else {
        vec![
            (
                "ker G† = ker U*T_Φ",
                kernel_distance(&g_pinv, &ustar_tphi, pol)?,
            ),
            (
                "ran G† = ran T_Ψ*U*",
                range_distance(&g_pinv, &tpsi_star_ustar, pol)?,
            ),
        ]
    };
    for (name, residual) in pairs {
        let holds = residual <= pol.equality_tolerance;
        if !holds && rank_reliable {
            return Err(Error::violation(name, residual));
        }
        kernel_range_checks.push(RepresentationCheck {
            name: name.into(),
            residual,
            holds,
            guaranteed: true,
        });
    }

    let all_guaranteed_hold = representations
        .iter()
        .filter(|r| r.guaranteed)
        .all(|r| r.holds)
        && kernel_range_checks.iter().all(|r| r.holds);

    Ok(PinvGramReport {
        pinv: g_pinv,
        u_invertible,
        range_condition_psi: rc_psi,
        range_condition_phi: rc_phi,
        representations,
        kernel_range_checks,
        phi_dual: phi_special.frame,
        psi_dual: psi_special.frame,
        rank_reliable,
        all_guaranteed_hold,
    })
}

/// Inverse of the image frame operator via pseudo-inverses of the operator.
#[derive(Clone, Debug, Serialize)]
pub struct ImageFrameReport {
    /// `U*† S_Ψ⁻¹ U†`.
    pub inverse: LinearMap,
    /// `‖(U*† S_Ψ⁻¹ U†) S_{UΨ} − π_{R(U)}‖`.
    pub residual: f64,
    pub inverts_on_range: bool,
    /// `R(U*) = S_Ψ R(U*)`; when true the inversion identity is guaranteed.
    pub invariance_holds: bool,
    /// Optimal bounds of `UΨ` as a frame for `R(U)`, when `U ≠ 0`.
    pub image_bounds: Option<(f64, f64)>,
    /// `[m·A_Ψ, M·B_Ψ]` with `m = σ₊min(U)²`, `M = ‖U‖²`.
    pub bound_window: Option<(f64, f64)>,
    pub bounds_within_window: bool,
}

/// Frame bounds of the image family `UΨ` and the candidate inverse
/// `U*† S_Ψ⁻¹ U†` of its frame operator on the range of `U`.
pub fn image_frame_inverse(
    u: &LinearMap,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<ImageFrameReport> {
    if !right.classify(pol).is_frame() {
        return Err(Error::pre("image-frame inversion needs a frame"));
    }
    let s_inv = right.frame_operator().try_inverse(pol)?;
    let u_svd = u.svd_with(pol)?;
    let u_pinv = u_svd.pseudo_inverse();
    let inverse = &(&u_pinv.adjoint() * &s_inv) * &u_pinv;

    let image = right.transform(u)?;
    let projector = u_svd.range_projector();
    let residual = (&inverse * image.frame_operator()).distance(&projector);
    let inverts_on_range = residual <= pol.equality_tolerance;
    let invariance_holds = range_condition(u, right, RangeSide::Psi, pol)?;
    if invariance_holds && !inverts_on_range && !u_svd.rank_is_ambiguous() {
        return Err(Error::violation(
            "image frame-operator inverse under a verified range condition",
            residual,
        ));
    }

    let rank = u_svd.rank();
    let (image_bounds, bound_window, bounds_within_window) = if rank == 0 {
        (None, None, true)
    } else {
        let (a_img, b_img) = image.frame_bounds_with(pol)?;
        let (a_psi, b_psi) = right.frame_bounds_with(pol)?;
        let m = u_svd.sigma_min_positive().powi(2);
        let cap = u_svd.operator_norm().powi(2);
        let window = (m * a_psi, cap * b_psi);
        let slack = 1.0 + 1e-9;
        let within = a_img >= window.0 / slack && b_img <= window.1 * slack;
        (Some((a_img, b_img)), Some(window), within)
    };

    Ok(ImageFrameReport {
        inverse,
        residual,
        inverts_on_range,
        invariance_holds,
        image_bounds,
        bound_window,
        bounds_within_window,
    })
}

/// The candidate `T_{(UΨ)~}* T_Φ̃` for `G†` and the range conditions that
/// decide whether it is exact.
#[derive(Clone, Debug, Serialize)]
pub struct PinvTildeReport {
    pub candidate: LinearMap,
    pub pinv: LinearMap,
    pub residual: f64,
    /// `R(T_Φ*) = R(T_Φ* U)`.
    pub condition_holds: bool,
    /// `span Φ = R(U)` (the frame-for-the-range case, no further condition).
    pub left_spans_operator_range: bool,
    /// Whether the candidate matches `G†` to tolerance.
    pub candidate_matches: bool,
    /// Agreement between `candidate_matches` and `condition_holds`; `None`
    /// when the residual lands between match and clear mismatch. The
    /// condition is sufficient but not necessary (projected left frames can
    /// match without it), so `Some(false)` with a matching candidate is a
    /// recorded observation, not a defect.
    pub iff_consistent: Option<bool>,
}

/// Tests `G† = T_{(UΨ)~}* T_Φ̃` against `R(T_Φ*) = R(T_Φ* U)`, with the
/// canonical dual of `UΨ` taken on the range of `U`. The identity is also
/// guaranteed when Φ is a frame for `R(U)` itself.
pub fn pinv_via_tilde(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<PinvTildeReport> {
    if !right.classify(pol).is_frame() {
        return Err(Error::pre("the tilde representation needs a right frame"));
    }
    if left.bessel_bound() == 0.0 {
        return Err(Error::pre("the left family must contain a nonzero vector"));
    }
    let gram = cross_gram(u, left, right)?;
    let g_pinv = gram.matrix().svd_with(pol)?.pseudo_inverse();

    let image = right.transform(u)?;
    let image_dual_synthesis = &image.frame_operator().pseudo_inverse(pol)? * image.synthesis();
    let phi_tilde = left.canonical_dual_with(pol)?;
    let candidate = &image_dual_synthesis.adjoint() * phi_tilde.synthesis();

    let residual = rel_residual(&g_pinv, &candidate);
    let candidate_matches = residual <= pol.equality_tolerance;
    // R(T_Φ*) = R(T_Φ* U), both sitting in the coefficient space ℂ^{m_Φ}.
    let analysis = left.analysis();
    let condition_holds = crate::matrix::range_equal(&analysis, &(&analysis * u), pol)?;
    let left_spans_operator_range = crate::matrix::range_equal(left.synthesis(), u, pol)?;

    let guaranteed =
        (left.classify(pol).is_frame() && condition_holds) || left_spans_operator_range;
    if guaranteed && !candidate_matches && !u.svd_with(pol)?.rank_is_ambiguous() {
        return Err(Error::violation(
            "tilde representation under a verified range condition",
            residual,
        ));
    }

    let clear_mismatch = residual > 10.0 * pol.equality_tolerance;
    let iff_consistent = if candidate_matches {
        Some(condition_holds)
    } else if clear_mismatch {
        Some(!condition_holds)
    } else {
        None
    };

    Ok(PinvTildeReport {
        candidate,
        pinv: g_pinv,
        residual,
        condition_holds,
        left_spans_operator_range,
        candidate_matches,
        iff_consistent,
    })
}

/// The transported pseudo-inverse identity for `G_{U₁, UΦ, U*Ψ}` with
/// `U₁ = U` restricted to `R(U*) → R(U)`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    pub gram: LinearMap,
    pub pinv: LinearMap,
    /// `G_{(U*UU*)†, Ψ̃, Φ̃}`.
    pub formula: LinearMap,
    pub residual: f64,
    pub holds: bool,
    /// `S_Φ R(U*) = R(U*)`.
    pub invariance_phi: bool,
    /// `S_Ψ R(U) = R(U)`.
    pub invariance_psi: bool,
    /// Whether the identity is guaranteed (both invariances hold).
    pub guaranteed: bool,
}

/// Forms `G = T_{UΦ}* U T_{U*Ψ}` and compares its pseudo-inverse against
/// `T_Ψ̃* (U*UU*)† T_Φ̃`. The identity is exact precisely when both frame
/// operators leave the relevant ranges invariant.
pub fn pinv_transported(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<TransportReport> {
    if !left.classify(pol).is_frame() || !right.classify(pol).is_frame() {
        return Err(Error::pre("the transported representation needs frames"));
    }
    let left_image = left.transform(u)?; // UΦ
    let right_image = right.transform(&u.adjoint())?; // U*Ψ
    let gram = cross_gram(u, &left_image, &right_image)?;
    let g_pinv = gram.matrix().svd_with(pol)?.pseudo_inverse();

    let p = &(&u.adjoint() * u) * &u.adjoint(); // U*UU*
    let p_pinv = p.pseudo_inverse(pol)?;
    let psi_tilde = right.canonical_dual_with(pol)?;
    let phi_tilde = left.canonical_dual_with(pol)?;
    let formula = &(&psi_tilde.analysis() * &p_pinv) * phi_tilde.synthesis();

    let residual = rel_residual(&g_pinv, &formula);
    let holds = residual <= pol.equality_tolerance;

    let invariance_phi = {
        let ustar = u.adjoint();
        crate::matrix::range_equal(&ustar, &(left.frame_operator() * &ustar), pol)?
    };
    let invariance_psi = crate::matrix::range_equal(u, &(right.frame_operator() * u), pol)?;
    let guaranteed = invariance_phi && invariance_psi;
    if guaranteed && !holds && !u.svd_with(pol)?.rank_is_ambiguous() {
        return Err(Error::violation(
            "transported pseudo-inverse identity under verified invariance",
            residual,
        ));
    }

    Ok(TransportReport {
        gram: gram.matrix().clone(),
        pinv: g_pinv,
        formula,
        residual,
        holds,
        invariance_phi,
        invariance_psi,
        guaranteed,
    })
}

/// Range identity and factorizations of the Gram matrix through the image
/// families.
#[derive(Clone, Debug, Serialize)]
pub struct RangeWitnessReport {
    /// Projector distance between `ran G` and `ran T_{U*Φ}*`.
    pub range_residual: f64,
    pub range_match: bool,
    /// `‖G − T_{UU†Φ}* T_{UΨ}‖`.
    pub factorization_projected_left: f64,
    /// `‖G − T_{U*Φ}* T_{U†UΨ}‖`.
    pub factorization_projected_right: f64,
    pub all_hold: bool,
}

/// Verifies `ran G_{U,Φ,Ψ} = ran T_{U*Φ}*` (for a right frame) and the two
/// factorizations of `G` through the projected families.
pub fn gram_range_witness(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<RangeWitnessReport> {
    if !right.classify(pol).is_frame() {
        return Err(Error::pre("the range identity needs a right frame"));
    }
    let gram = cross_gram(u, left, right)?;
    let g = gram.matrix();

    let ustar_phi_analysis = &left.analysis() * u; // T_{U*Φ}* = T_Φ* U
    let range_residual = range_distance(g, &ustar_phi_analysis, pol)?;
    let range_match = range_residual <= pol.equality_tolerance;

    let u_svd = u.svd_with(pol)?;
    let projector = u_svd.range_projector();
    let u_pinv = u_svd.pseudo_inverse();

    let left_projected = left.transform(&projector)?; // UU†Φ
    let right_image = right.transform(u)?; // UΨ
    let f1 = &left_projected.analysis() * right_image.synthesis();
    let factorization_projected_left = g.distance(&f1);

    let right_projected = right.transform(&(&u_pinv * u))?; // U†UΨ
    let f2 = &ustar_phi_analysis * right_projected.synthesis();
    let factorization_projected_right = g.distance(&f2);

    let scale = 1.0 + g.operator_norm();
    let all_hold = range_match
        && factorization_projected_left <= pol.equality_tolerance * scale
        && factorization_projected_right <= pol.equality_tolerance * scale;
    if !all_hold && !u_svd.rank_is_ambiguous() {
        return Err(Error::violation(
            "Gram range/factorization identity",
            range_residual
                .max(factorization_projected_left)
                .max(factorization_projected_right),
        ));
    }

    Ok(RangeWitnessReport {
        range_residual,
        range_match,
        factorization_projected_left,
        factorization_projected_right,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn frame(dim: usize, vectors: &[Vec<f64>]) -> FrameSystem {
        let complex: Vec<Vec<Complex64>> = vectors
            .iter()
            .map(|v| v.iter().map(|&x| c(x)).collect())
            .collect();
        FrameSystem::from_vectors(dim, &complex).unwrap()
    }

    fn redundant_left() -> FrameSystem {
        frame(2, &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
    }

    #[test]
    fn invert_gram_diagonal_case() {
        let onb = FrameSystem::standard(2);
        let u = LinearMap::from_real_diagonal(&[2.0, 1.0]);
        let report = invert_gram(&u, &onb, &onb, &pol()).unwrap();
        assert!(report.invertible);
        assert!(report.theorem_ok);
        assert!(report.u_invertible.unwrap());
        assert!(report.inverse_residual.unwrap() < 1e-12);
    }

    #[test]
    fn invert_gram_non_spanning_riesz_sequences() {
        let partial = frame(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let report = invert_gram(&LinearMap::identity(3), &partial, &partial, &pol()).unwrap();
        assert!(report.invertible);
        assert!(report.left_class.is_riesz_sequence());
        assert!(!report.left_class.spanning);
        assert!(report.u_invertible.is_none());
        assert!(report.theorem_ok);
    }

    #[test]
    fn invert_gram_rejects_non_square() {
        let onb = FrameSystem::standard(2);
        let redundant = redundant_left();
        assert!(invert_gram(&LinearMap::identity(2), &onb, &redundant, &pol()).is_err());
    }

    #[test]
    fn one_sided_single_vector_row() {
        let single = frame(2, &[vec![1.0, 0.0]]);
        let onb = FrameSystem::standard(2);
        let report = one_sided_diagnosis(&LinearMap::identity(2), &single, &onb, &pol()).unwrap();
        assert!(report.right_invertible);
        assert!(!report.left_invertible);
        assert!(report.left_family_riesz.unwrap());
        assert!(report.ustar_left_riesz.unwrap());
        assert!(report.theorem_ok);
    }

    #[test]
    fn one_sided_square_invertible_has_both() {
        let onb = FrameSystem::standard(2);
        let report = one_sided_diagnosis(&LinearMap::identity(2), &onb, &onb, &pol()).unwrap();
        assert!(report.right_invertible && report.left_invertible);
        assert!(report.left_family_riesz_basis.unwrap());
        assert!(report.u_right_frame.unwrap());
    }

    #[test]
    fn one_sided_zero_has_neither() {
        let onb = FrameSystem::standard(2);
        let report = one_sided_diagnosis(&LinearMap::zeros(2, 2), &onb, &onb, &pol()).unwrap();
        assert!(!report.right_invertible && !report.left_invertible);
    }

    #[test]
    fn special_dual_identity_case() {
        let onb = FrameSystem::standard(2);
        let dual = special_dual(
            &LinearMap::identity(2),
            &onb,
            &onb,
            DualSide::PhiSide,
            &pol(),
        )
        .unwrap();
        assert!(dual.frame.synthesis().distance(onb.synthesis()) < 1e-12);
        assert!(dual.duality_residual < 1e-12);
        assert!(dual.full_space);
    }

    #[test]
    fn special_dual_redundant_left_frame() {
        // U = diag(2,1), Φ = {e1,e1,e2}, Ψ = ONB: the special dual comes out
        // as {e1/2, e1/2, e2}, assembled here by hand from G†.
        let u = LinearMap::from_real_diagonal(&[2.0, 1.0]);
        let phi = redundant_left();
        let onb = FrameSystem::standard(2);
        let dual = special_dual(&u, &phi, &onb, DualSide::PhiSide, &pol()).unwrap();
        assert!(dual.duality_residual <= 1e-9);
        let expected = frame(2, &[vec![0.5, 0.0], vec![0.5, 0.0], vec![0.0, 1.0]]);
        assert!(dual.frame.synthesis().distance(expected.synthesis()) < 1e-12);
        assert!(dual.kernel_residual < 1e-9);
    }

    #[test]
    fn special_dual_sides_are_adjoint_related() {
        // The phi-side dual for (U, Φ, Ψ) equals the psi-side dual for
        // (U*, Ψ, Φ).
        let u = LinearMap::from_rows(2, 2, &[c(1.0), Complex64::new(0.5, 0.25), c(0.0), c(2.0)])
            .unwrap();
        let phi = redundant_left();
        let psi = frame(2, &[vec![1.0, 0.1], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let a = special_dual(&u, &phi, &psi, DualSide::PhiSide, &pol()).unwrap();
        let b = special_dual(&u.adjoint(), &psi, &phi, DualSide::PsiSide, &pol()).unwrap();
        assert!(a.frame.synthesis().distance(b.frame.synthesis()) < 1e-10);
    }

    #[test]
    fn pinv_gram_identity_case() {
        let onb = FrameSystem::standard(2);
        let report = pinv_gram(&LinearMap::identity(2), &onb, &onb, &pol()).unwrap();
        assert!(report.u_invertible);
        assert!(report.range_condition_psi && report.range_condition_phi);
        assert!(report.pinv.distance_to_identity() < 1e-12);
        assert!(report.all_guaranteed_hold);
        assert!(report
            .representations
            .iter()
            .all(|r| r.guaranteed && r.holds));
    }

    #[test]
    fn pinv_gram_engineered_range_condition_failure() {
        // Ψ = {e1, e2, e2} has S_Ψ = diag(1, 2); U* with range spanned by
        // e1+e2 is not S_Ψ-invariant, so the psi-side condition fails and
        // the phi-side representations are not guaranteed.
        let psi = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let phi = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let s = 1.0 / 2.0_f64.sqrt();
        let u = LinearMap::from_real_rows(2, 2, &[s, s, 0.0, 0.0]).unwrap();
        let report = pinv_gram(&u, &phi, &psi, &pol()).unwrap();
        assert!(!report.u_invertible);
        assert!(!report.range_condition_psi);
        let phi_side = report
            .representations
            .iter()
            .find(|r| r.name.contains("Φ^{(U,Ψ)}"))
            .unwrap();
        assert!(!phi_side.guaranteed);
        assert!(!phi_side.holds, "representation should genuinely fail here");
        // Unconditional kernel/range identities still hold.
        assert!(report.kernel_range_checks.iter().all(|k| k.holds));
    }

    #[test]
    fn pinv_gram_tight_right_frame_guarantees_phi_side() {
        // Tight Ψ forces the psi-side range condition for every U.
        let psi = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let phi = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let u = LinearMap::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        let report = pinv_gram(&u, &phi, &psi, &pol()).unwrap();
        assert!(report.range_condition_psi);
        let phi_side = report
            .representations
            .iter()
            .find(|r| r.name.contains("Φ^{(U,Ψ)}"))
            .unwrap();
        assert!(phi_side.guaranteed && phi_side.holds);
    }

    #[test]
    fn range_condition_examples() {
        let p = pol();
        // Tight frame: S is a multiple of the identity.
        let tight = FrameSystem::standard(2);
        let any_u = LinearMap::from_real_rows(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(range_condition(&any_u, &tight, RangeSide::Psi, &p).unwrap());

        let skew = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let s = 1.0 / 2.0_f64.sqrt();
        let u = LinearMap::from_real_rows(2, 2, &[s, s, 0.0, 0.0]).unwrap();
        assert!(!range_condition(&u, &skew, RangeSide::Psi, &p).unwrap());

        assert!(range_condition(&LinearMap::zeros(2, 2), &skew, RangeSide::Psi, &p).unwrap());
    }

    #[test]
    fn image_frame_inverse_examples() {
        let p = pol();
        let onb = FrameSystem::standard(2);

        let id = image_frame_inverse(&LinearMap::identity(2), &onb, &p).unwrap();
        assert!(id.inverts_on_range);
        assert!(id.inverse.distance_to_identity() < 1e-12);

        let doubled =
            image_frame_inverse(&LinearMap::from_real_diagonal(&[2.0, 2.0]), &onb, &p).unwrap();
        let quarter = LinearMap::from_real_diagonal(&[0.25, 0.25]);
        assert!(doubled.inverse.distance(&quarter) < 1e-12);
        assert!(doubled.inverts_on_range);

        let projectorish =
            image_frame_inverse(&LinearMap::from_real_diagonal(&[2.0, 0.0]), &onb, &p).unwrap();
        let expected = LinearMap::from_real_diagonal(&[0.25, 0.0]);
        assert!(projectorish.inverse.distance(&expected) < 1e-12);
        assert!(projectorish.inverts_on_range);
        let (a, b) = projectorish.image_bounds.unwrap();
        let (lo, hi) = projectorish.bound_window.unwrap();
        assert!(lo <= a * (1.0 + 1e-9) && b <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn pinv_via_tilde_invertible_operator() {
        let u = LinearMap::from_rows(2, 2, &[c(2.0), c(0.5), c(0.0), c(1.0)]).unwrap();
        let phi = redundant_left();
        let psi = frame(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, -1.0]]);
        let report = pinv_via_tilde(&u, &phi, &psi, &pol()).unwrap();
        assert!(report.condition_holds);
        assert!(report.candidate_matches, "residual = {}", report.residual);
        assert_eq!(report.iff_consistent, Some(true));
    }

    #[test]
    fn pinv_via_tilde_rank_deficient_mismatch() {
        // U = diag(1,0) with the skew Riesz basis Φ = {e1, e1+e2}: the
        // frame operator S_Φ does not preserve R(U), the condition fails,
        // and the candidate genuinely differs from G†.
        let u = LinearMap::from_real_diagonal(&[1.0, 0.0]);
        let phi = frame(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let onb = FrameSystem::standard(2);
        let report = pinv_via_tilde(&u, &phi, &onb, &pol()).unwrap();
        assert!(!report.condition_holds);
        assert!(!report.candidate_matches);
        assert_eq!(report.iff_consistent, Some(true));
    }

    #[test]
    fn pinv_via_tilde_condition_is_not_necessary() {
        // With Φ orthonormal the candidate matches G† even though the range
        // condition fails: the condition is sufficient, not necessary.
        let u = LinearMap::from_real_diagonal(&[1.0, 0.0]);
        let onb = FrameSystem::standard(2);
        let report = pinv_via_tilde(&u, &onb, &onb, &pol()).unwrap();
        assert!(!report.condition_holds);
        assert!(report.candidate_matches, "residual = {}", report.residual);
        assert_eq!(report.iff_consistent, Some(false));
    }

    #[test]
    fn pinv_via_tilde_frame_for_the_range() {
        // Φ a frame for R(U) (not for all of ℂ³): the representation holds
        // with no extra condition.
        let u = LinearMap::from_real_diagonal(&[1.0, 2.0, 0.0]);
        let phi = frame(
            3,
            &[
                vec![1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0],
            ],
        );
        let psi = frame(
            3,
            &[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
        );
        let report = pinv_via_tilde(&u, &phi, &psi, &pol()).unwrap();
        assert!(report.left_spans_operator_range);
        assert!(report.candidate_matches, "residual = {}", report.residual);
    }

    #[test]
    fn pinv_transported_scaled_identity() {
        let onb = FrameSystem::standard(2);
        let u = LinearMap::from_real_diagonal(&[2.0, 2.0]);
        let report = pinv_transported(&u, &onb, &onb, &pol()).unwrap();
        let expected_gram = LinearMap::from_real_diagonal(&[8.0, 8.0]);
        assert!(report.gram.distance(&expected_gram) < 1e-12);
        let expected_pinv = LinearMap::from_real_diagonal(&[0.125, 0.125]);
        assert!(report.pinv.distance(&expected_pinv) < 1e-12);
        assert!(report.guaranteed && report.holds);
    }

    #[test]
    fn pinv_transported_zero_operator_is_vacuous() {
        let onb = FrameSystem::standard(2);
        let report = pinv_transported(&LinearMap::zeros(2, 2), &onb, &onb, &pol()).unwrap();
        assert!(report.holds);
        assert!(report.residual < 1e-12);
    }

    #[test]
    fn pinv_transported_detects_missing_invariance() {
        // Rank-one operator with a non-tight left frame: the identity fails
        // and the invariance flags say why.
        let u = LinearMap::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        let phi = frame(2, &[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let onb = FrameSystem::standard(2);
        let report = pinv_transported(&u, &phi, &onb, &pol()).unwrap();
        assert!(!report.invariance_phi);
        assert!(report.invariance_psi);
        assert!(!report.guaranteed);
        assert!(!report.holds, "residual = {}", report.residual);
    }

    #[test]
    fn gram_range_witness_examples() {
        let p = pol();
        let onb = FrameSystem::standard(2);
        let report = gram_range_witness(&LinearMap::identity(2), &onb, &onb, &p).unwrap();
        assert!(report.all_hold);

        let rank_one = LinearMap::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        let phi = redundant_left();
        let report = gram_range_witness(&rank_one, &phi, &onb, &p).unwrap();
        assert!(report.all_hold);
        assert!(report.range_residual <= 1e-9);
    }
}
