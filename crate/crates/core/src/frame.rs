//! Finite frame systems: synthesis/analysis/frame operators, frame bounds,
//! classification, and dual-frame construction and verification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::certificate::{BoundCheck, Certificate};
use crate::error::{Error, Result};
use crate::matrix::LinearMap;
use crate::tolerance::TolerancePolicy;

/// Structural classification of a finite vector family in ℂⁿ.
///
/// Every finite family is Bessel. A spanning family is a frame; a family
/// whose synthesis operator is injective is a Riesz sequence; both together
/// make a Riesz basis, and a Riesz basis with identity Gram matrix is an
/// orthonormal basis. Families that are neither spanning nor independent are
/// frame sequences for their span. `BesselOnly` is reserved for degenerate
/// systems (empty, or all vectors zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FrameKind {
    BesselOnly,
    FrameSequence,
    Frame,
    RieszSequence,
    RieszBasis,
    OrthonormalBasis,
}

/// Classification verdict together with the frame bounds.
///
/// `lower` is the optimal frame-sequence bound (smallest nonzero squared
/// singular value of the synthesis operator); `upper` is the Bessel bound.
/// `spanning` records completeness separately so non-spanning systems still
/// carry meaningful bounds.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrameClass {
    pub kind: FrameKind,
    pub lower: f64,
    pub upper: f64,
    pub spanning: bool,
}

impl FrameClass {
    pub fn is_frame(&self) -> bool {
        matches!(
            self.kind,
            FrameKind::Frame | FrameKind::RieszBasis | FrameKind::OrthonormalBasis
        )
    }

    pub fn is_riesz_sequence(&self) -> bool {
        matches!(
            self.kind,
            FrameKind::RieszSequence | FrameKind::RieszBasis | FrameKind::OrthonormalBasis
        )
    }

    pub fn is_riesz_basis(&self) -> bool {
        matches!(
            self.kind,
            FrameKind::RieszBasis | FrameKind::OrthonormalBasis
        )
    }
}

/// A finite indexed family of vectors in ℂⁿ.
///
/// The synthesis operator is the n×m matrix whose j-th column is the j-th
/// vector. The frame operator `S = T T*` and the singular values of `T` are
/// computed eagerly at construction and shared immutably afterwards.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    synthesis: LinearMap,
    frame_op: LinearMap,
    /// Singular values of the synthesis operator, descending.
    sigma: DVector<f64>,
}

impl FrameSystem {
    /// Builds a frame system from its synthesis matrix (columns = vectors).
    pub fn from_synthesis(synthesis: LinearMap) -> Result<Self> {
        let frame_op = &synthesis * &synthesis.adjoint();
        let sigma = if synthesis.cols() == 0 || synthesis.rows() == 0 {
            DVector::zeros(0)
        } else {
            synthesis.svd()?.singular_values().clone_owned()
        };
        Ok(FrameSystem {
            synthesis,
            frame_op,
            sigma,
        })
    }

    /// Builds from explicit vectors, each of length `dim`.
    pub fn from_vectors(dim: usize, vectors: &[Vec<Complex64>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dim("ambient dimension must be positive"));
        }
        let mut mat = DMatrix::<Complex64>::zeros(dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::dim(format!(
                    "vector {j} has length {}, expected {dim}",
                    v.len()
                )));
            }
            for (i, &z) in v.iter().enumerate() {
                mat[(i, j)] = z;
            }
        }
        Self::from_synthesis(LinearMap::from_matrix(mat)?)
    }

    /// The standard orthonormal basis of ℂⁿ.
    pub fn standard(n: usize) -> Self {
        FrameSystem::from_synthesis(LinearMap::identity(n)).expect("identity is finite")
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.synthesis.rows()
    }

    /// Number of vectors m.
    pub fn count(&self) -> usize {
        self.synthesis.cols()
    }

    pub fn vector(&self, j: usize) -> DVector<Complex64> {
        self.synthesis.column(j)
    }

    /// Synthesis operator `T: ℂᵐ → ℂⁿ`, `c ↦ Σ cⱼ φⱼ`.
    pub fn synthesis(&self) -> &LinearMap {
        &self.synthesis
    }

    /// Analysis operator `T*: ℂⁿ → ℂᵐ`, `f ↦ {⟨f, φⱼ⟩}ⱼ`.
    pub fn analysis(&self) -> LinearMap {
        self.synthesis.adjoint()
    }

    /// Frame operator `S = T T*`, positive semidefinite.
    pub fn frame_operator(&self) -> &LinearMap {
        &self.frame_op
    }

    /// Gram matrix `T* T`.
    pub fn gram_matrix(&self) -> LinearMap {
        &self.synthesis.adjoint() * &self.synthesis
    }

    /// Singular values of the synthesis operator, descending.
    pub fn synthesis_singular_values(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn synthesize(&self, coefficients: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.synthesis.apply(coefficients)
    }

    pub fn analyze(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if f.len() != self.dim() {
            return Err(Error::dim(format!(
                "analysis takes vectors of length {}, got {}",
                self.dim(),
                f.len()
            )));
        }
        Ok(self.synthesis.matrix().adjoint() * f)
    }

    /// Bessel bound `B = σ₁(T)²` (zero for empty systems).
    pub fn bessel_bound(&self) -> f64 {
        if self.sigma.is_empty() {
            0.0
        } else {
            self.sigma.max().powi(2)
        }
    }

    /// Optimal frame bounds `(A, B)` with the default tolerance policy.
    ///
    /// `A` is the frame-sequence bound: the smallest nonzero squared singular
    /// value of the synthesis operator. Errors on empty or all-zero systems.
    pub fn frame_bounds(&self) -> Result<(f64, f64)> {
        self.frame_bounds_with(&TolerancePolicy::default())
    }

    pub fn frame_bounds_with(&self, pol: &TolerancePolicy) -> Result<(f64, f64)> {
        let b = self.bessel_bound();
        if b == 0.0 {
            return Err(Error::pre("frame bounds of an empty or all-zero system"));
        }
        let cutoff = pol.relative_rank_cutoff * self.sigma.max();
        let a = self
            .sigma
            .iter()
            .filter(|&&s| s > cutoff)
            .fold(f64::INFINITY, |acc, &s| acc.min(s));
        Ok((a * a, b))
    }

    /// Numeric rank of the synthesis operator.
    pub fn synthesis_rank(&self, pol: &TolerancePolicy) -> usize {
        if self.sigma.is_empty() {
            return 0;
        }
        let cutoff = pol.relative_rank_cutoff * self.sigma.max();
        self.sigma.iter().filter(|&&s| s > cutoff).count()
    }

    /// Whether the family spans ℂⁿ.
    pub fn is_spanning(&self, pol: &TolerancePolicy) -> bool {
        self.synthesis_rank(pol) == self.dim()
    }

    /// Classifies the family and reports its bounds.
    pub fn classify(&self, pol: &TolerancePolicy) -> FrameClass {
        let rank = self.synthesis_rank(pol);
        let spanning = rank == self.dim();
        if self.count() == 0 || self.bessel_bound() == 0.0 {
            return FrameClass {
                kind: FrameKind::BesselOnly,
                lower: 0.0,
                upper: self.bessel_bound(),
                spanning: false,
            };
        }
        let (lower, upper) = self
            .frame_bounds_with(pol)
            .expect("nonzero system has bounds");
        let independent = rank == self.count();
        let kind = match (spanning, independent) {
            (true, true) => {
                let gram_dist = self.gram_matrix().distance_to_identity();
                if gram_dist <= pol.equality_tolerance {
                    FrameKind::OrthonormalBasis
                } else {
                    FrameKind::RieszBasis
                }
            }
            (true, false) => FrameKind::Frame,
            (false, true) => FrameKind::RieszSequence,
            (false, false) => FrameKind::FrameSequence,
        };
        FrameClass {
            kind,
            lower,
            upper,
            spanning,
        }
    }

    /// Canonical dual `Φ̃ = S† Φ` (equals `S⁻¹ Φ` for spanning systems).
    ///
    /// Satisfies `T_Φ̃ T_Φ* = π_span Φ`. Errors on all-zero systems.
    pub fn canonical_dual(&self) -> Result<FrameSystem> {
        self.canonical_dual_with(&TolerancePolicy::default())
    }

    pub fn canonical_dual_with(&self, pol: &TolerancePolicy) -> Result<FrameSystem> {
        if self.bessel_bound() == 0.0 {
            return Err(Error::pre("canonical dual of an empty or all-zero system"));
        }
        let s_pinv = self.frame_op.pseudo_inverse(pol)?;
        FrameSystem::from_synthesis(&s_pinv * &self.synthesis)
    }

    /// The family `{U φⱼ}ⱼ` obtained by pushing every vector through `u`.
    pub fn transform(&self, u: &LinearMap) -> Result<FrameSystem> {
        if u.cols() != self.dim() {
            return Err(Error::dim(format!(
                "operator takes ℂ^{} but the frame lives in ℂ^{}",
                u.cols(),
                self.dim()
            )));
        }
        FrameSystem::from_synthesis(u * &self.synthesis)
    }

    /// Scales every vector by the same factor.
    pub fn scale(&self, factor: Complex64) -> FrameSystem {
        FrameSystem::from_synthesis(self.synthesis.scale(factor)).expect("scaling stays finite")
    }

    /// Certificate that `self` and `other` are a dual pair, i.e.
    /// `‖T_self T_other* − I‖ ≤ tol`.
    pub fn is_dual_pair(&self, other: &FrameSystem, pol: &TolerancePolicy) -> Result<Certificate> {
        if self.dim() != other.dim() || self.count() != other.count() {
            return Err(Error::dim(format!(
                "dual pair needs matching shapes: ({}, {}) vs ({}, {})",
                self.dim(),
                self.count(),
                other.dim(),
                other.count()
            )));
        }
        let residual = (&(self.synthesis() * &other.analysis()) - &LinearMap::identity(self.dim()))
            .operator_norm();
        let check = BoundCheck::le("‖T_F T_G* − I‖ ≤ tol", residual, pol.equality_tolerance);
        Ok(Certificate::new(
            "dual-pair",
            vec![check],
            "every f reconstructs as Σ ⟨f, gᵢ⟩ fᵢ",
        ))
    }

    /// ℓ² distance `(Σⱼ ‖φⱼ − ψⱼ‖²)^½` between two equally indexed families.
    pub fn elementwise_distance(&self, other: &FrameSystem) -> Result<f64> {
        if self.dim() != other.dim() || self.count() != other.count() {
            return Err(Error::dim("elementwise distance needs matching shapes"));
        }
        Ok((self.synthesis() - other.synthesis()).frobenius_norm())
    }
}
