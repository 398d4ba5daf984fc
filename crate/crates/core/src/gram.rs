//! Construction and algebra of cross Gram matrices `G = T_Φ* U T_Ψ` with
//! entries `⟨U ψⱼ, φᵢ⟩`: adjoints, composition with provenance tracking,
//! operator reconstruction, and the identity-Gram characterization.
//!
//! A bounded Gram matrix says nothing about the factors on its own:
//! reciprocal scalings like `Φ = {k·eₖ}`, `Ψ = {eₖ/k}` keep `G = I` while
//! the Bessel bound of Φ grows with the truncation size. Finite truncations
//! surface this only as conditioning — watch `B_Φ B_Ψ` against `‖G‖` rather
//! than expecting a converse bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::FrameSystem;
use crate::matrix::LinearMap;
use crate::tolerance::TolerancePolicy;

/// How tightly the two defining formulas (entrywise inner products and the
/// operator factorization) must agree at construction time.
const CONSTRUCTION_AGREEMENT: f64 = 1e-12;

/// The operator and frame pair that produced a Gram matrix.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub operator: LinearMap,
    pub left: FrameSystem,
    pub right: FrameSystem,
}

/// A cross Gram matrix, optionally carrying the `(U, Φ, Ψ)` that produced it.
///
/// Matrices loaded from files have no provenance; composition then falls
/// back to a plain matrix product.
#[derive(Clone, Debug)]
pub struct CrossGram {
    matrix: LinearMap,
    provenance: Option<Provenance>,
}

impl CrossGram {
    /// Wraps an externally produced matrix with unknown provenance.
    pub fn from_matrix(matrix: LinearMap) -> Self {
        CrossGram {
            matrix,
            provenance: None,
        }
    }

    pub fn matrix(&self) -> &LinearMap {
        &self.matrix
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

/// Builds `G_{U,Φ,Ψ}` with entries `⟨U ψⱼ, φᵢ⟩`.
///
/// Both defining formulas are evaluated and must agree; the norm bound
/// `‖G‖ ≤ √(B_Φ B_Ψ) ‖U‖` is verified as well.
pub fn cross_gram(u: &LinearMap, left: &FrameSystem, right: &FrameSystem) -> Result<CrossGram> {
    if u.rows() != left.dim() || u.cols() != right.dim() {
        return Err(Error::dim(format!(
            "operator is {}x{} but the frames live in ℂ^{} (left) and ℂ^{} (right)",
            u.rows(),
            u.cols(),
            left.dim(),
            right.dim()
        )));
    }
    let factored = &left.analysis() * &(u * right.synthesis());

    // Entrywise definition, column by column.
    let mut entrywise = LinearMap::zeros(left.count(), right.count()).into_matrix();
    for j in 0..right.count() {
        let mapped = u.apply(&right.vector(j))?;
        for i in 0..left.count() {
            // ⟨U ψⱼ, φᵢ⟩, linear in the first argument.
            entrywise[(i, j)] = left.vector(i).dotc(&mapped);
        }
    }
    let entrywise = LinearMap::from_matrix(entrywise)?;

    let scale = 1.0 + factored.frobenius_norm();
    let agreement = factored.distance(&entrywise);
    if agreement > CONSTRUCTION_AGREEMENT * scale * left.dim().max(right.dim()).max(1) as f64 {
        return Err(Error::violation(
            "entrywise Gram formula vs analysis∘U∘synthesis factorization",
            agreement,
        ));
    }

    let bound = (left.bessel_bound() * right.bessel_bound()).sqrt() * u.operator_norm();
    let norm = factored.operator_norm();
    if norm > bound * (1.0 + 1e-9) + 1e-14 {
        return Err(Error::violation("‖G‖ ≤ √(B_Φ B_Ψ)·‖U‖", norm - bound));
    }

    Ok(CrossGram {
        matrix: factored,
        provenance: Some(Provenance {
            operator: u.clone(),
            left: left.clone(),
            right: right.clone(),
        }),
    })
}

/// Plain cross Gram matrix of two frames (`U = I`).
pub fn cross_gram_pair(left: &FrameSystem, right: &FrameSystem) -> Result<CrossGram> {
    if left.dim() != right.dim() {
        return Err(Error::dim("cross Gram of frames in different spaces"));
    }
    cross_gram(&LinearMap::identity(left.dim()), left, right)
}

/// `G* = G_{U*,Ψ,Φ}`: conjugate transpose with provenance swapped.
pub fn adjoint(g: &CrossGram) -> CrossGram {
    CrossGram {
        matrix: g.matrix.adjoint(),
        provenance: g.provenance.as_ref().map(|p| Provenance {
            operator: p.operator.adjoint(),
            left: p.right.clone(),
            right: p.left.clone(),
        }),
    }
}

/// Matrix product of two cross Gram matrices with simplified provenance.
///
/// With provenance on both sides the recorded operator is
/// `U₁ T_Ψ T_Θ* U₂` in general, `U₁ S_Ψ U₂` when the inner frames coincide,
/// and `U₁ U₂` when they form a dual pair; the recorded provenance is
/// verified to reproduce the product. Without provenance the result is a
/// plain matrix product with unknown provenance.
pub fn compose(g1: &CrossGram, g2: &CrossGram, pol: &TolerancePolicy) -> Result<CrossGram> {
    if g1.cols() != g2.rows() {
        return Err(Error::dim(format!(
            "inner dimensions {} and {} do not match",
            g1.cols(),
            g2.rows()
        )));
    }
    let product = &g1.matrix * &g2.matrix;

    let (p1, p2) = match (&g1.provenance, &g2.provenance) {
        (Some(p1), Some(p2)) => (p1, p2),
        _ => return Ok(CrossGram::from_matrix(product)),
    };

    let inner_left = &p1.right; // Ψ
    let inner_right = &p2.left; // Θ

    let same_frame = inner_left.dim() == inner_right.dim()
        && inner_left.count() == inner_right.count()
        && inner_left.synthesis().distance(inner_right.synthesis())
            <= CONSTRUCTION_AGREEMENT * (1.0 + inner_left.synthesis().frobenius_norm());

    let operator = if same_frame {
        // G_{U₁,Φ,Ψ} G_{U₂,Ψ,Ξ} = G_{U₁ S_Ψ U₂,Φ,Ξ}
        &(&p1.operator * inner_left.frame_operator()) * &p2.operator
    } else if inner_left.dim() == inner_right.dim()
        && inner_left.count() == inner_right.count()
        && inner_left.is_dual_pair(inner_right, pol)?.verdict
    {
        // Dual inner pair collapses: G_{U₁ U₂,Φ,Ξ}
        &p1.operator * &p2.operator
    } else {
        &(&p1.operator * inner_left.synthesis()) * &(&inner_right.analysis() * &p2.operator)
    };

    let recomputed = cross_gram(&operator, &p1.left, &p2.right)?;
    let residual = recomputed.matrix.distance(&product);
    let scale = 1.0 + product.operator_norm();
    if residual > pol.equality_tolerance * scale {
        return Err(Error::violation(
            "composed provenance does not reproduce the matrix product",
            residual,
        ));
    }

    Ok(CrossGram {
        matrix: product,
        provenance: Some(Provenance {
            operator,
            left: p1.left.clone(),
            right: p2.right.clone(),
        }),
    })
}

/// Rebuilds the operator from its Gram matrix: `U = T_Φᵈ G T_Ψᵈ*`.
///
/// `left_dual` and `right_dual` must verify as duals of the provenance
/// frames. For spanning frames the result must match the provenance
/// operator; a mismatch is a defect, not an expected outcome.
pub fn reconstruct_operator(
    g: &CrossGram,
    left_dual: &FrameSystem,
    right_dual: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<LinearMap> {
    let p = g
        .provenance
        .as_ref()
        .ok_or_else(|| Error::pre("reconstruction needs provenance frames"))?;
    let left_ok = p.left.is_dual_pair(left_dual, pol)?.verdict;
    if !left_ok {
        return Err(Error::pre("left dual fails the duality check"));
    }
    let right_ok = p.right.is_dual_pair(right_dual, pol)?.verdict;
    if !right_ok {
        return Err(Error::pre("right dual fails the duality check"));
    }
    let rebuilt = &(left_dual.synthesis() * &g.matrix) * &right_dual.analysis();

    if p.left.is_spanning(pol) && p.right.is_spanning(pol) {
        let residual = rebuilt.distance(&p.operator);
        let scale = 1.0 + p.operator.operator_norm();
        if residual > pol.equality_tolerance * scale {
            return Err(Error::violation(
                "reconstructed operator differs from provenance",
                residual,
            ));
        }
    }
    Ok(rebuilt)
}

/// One verified statement inside a diagnosis report.
#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub name: String,
    pub residual: f64,
    pub holds: bool,
}

/// Outcome of checking `G = I` and the structure that equality forces.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityGramReport {
    pub distance_to_identity: f64,
    pub is_identity: bool,
    /// Only populated when the Gram matrix is the identity.
    pub clauses: Vec<Clause>,
    pub all_hold: bool,
}

/// Checks whether `G_{U,Φ,Ψ} = I` and, if so, verifies what that forces:
/// both frames are Riesz bases, `Φ = S_Φ U Ψ`, `Ψ = S_Ψ U* Φ`, and
/// `U = T_Φ̃ T_Ψ̃*` is invertible.
pub fn identity_gram_diagnosis(
    u: &LinearMap,
    left: &FrameSystem,
    right: &FrameSystem,
    pol: &TolerancePolicy,
) -> Result<IdentityGramReport> {
    let g = cross_gram(u, left, right)?;
    if !g.matrix().is_square() {
        return Ok(IdentityGramReport {
            distance_to_identity: f64::INFINITY,
            is_identity: false,
            clauses: vec![],
            all_hold: false,
        });
    }
    let dist = g.matrix().distance_to_identity();
    // ‖I‖ = 1, so the comparison is absolute.
    let is_identity = dist <= pol.equality_tolerance;
    if !is_identity {
        return Ok(IdentityGramReport {
            distance_to_identity: dist,
            is_identity: false,
            clauses: vec![],
            all_hold: false,
        });
    }

    let mut clauses = Vec::new();
    let left_class = left.classify(pol);
    clauses.push(Clause {
        name: "left family is a Riesz basis".into(),
        residual: 1.0 - f64::from(u8::from(left_class.is_riesz_basis())),
        holds: left_class.is_riesz_basis(),
    });
    let right_class = right.classify(pol);
    clauses.push(Clause {
        name: "right family is a Riesz basis".into(),
        residual: 1.0 - f64::from(u8::from(right_class.is_riesz_basis())),
        holds: right_class.is_riesz_basis(),
    });

    let scale = 1.0 + left.synthesis().operator_norm();
    let phi_residual =
        (left.synthesis() - &(&(left.frame_operator() * u) * right.synthesis())).operator_norm();
    clauses.push(Clause {
        name: "Φ = S_Φ U Ψ".into(),
        residual: phi_residual,
        holds: phi_residual <= pol.equality_tolerance * scale,
    });

    let scale = 1.0 + right.synthesis().operator_norm();
    let psi_residual = (right.synthesis()
        - &(&(right.frame_operator() * &u.adjoint()) * left.synthesis()))
        .operator_norm();
    clauses.push(Clause {
        name: "Ψ = S_Ψ U* Φ".into(),
        residual: psi_residual,
        holds: psi_residual <= pol.equality_tolerance * scale,
    });

    let left_dual = left.canonical_dual_with(pol)?;
    let right_dual = right.canonical_dual_with(pol)?;
    let rebuilt = left_dual.synthesis() * &right_dual.analysis();
    let u_residual = rebuilt.distance(u);
    let u_scale = 1.0 + u.operator_norm();
    let u_invertible = u.is_invertible(pol);
    clauses.push(Clause {
        name: "U = T_Φ̃ T_Ψ̃* and invertible".into(),
        residual: u_residual,
        holds: u_residual <= pol.equality_tolerance * u_scale && u_invertible,
    });

    let all_hold = clauses.iter().all(|c| c.holds);
    Ok(IdentityGramReport {
        distance_to_identity: dist,
        is_identity: true,
        clauses,
        all_hold,
    })
}
