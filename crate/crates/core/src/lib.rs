//! Numerical toolkit for cross Gram matrices of finite frame systems.
//!
//! A frame system is a finite family of vectors in ℂⁿ with a synthesis
//! operator `T` (coefficients to vectors) and an analysis operator `T*`
//! (vectors to coefficients). Sandwiching a linear map `U` between an
//! analysis and a synthesis operator yields the cross Gram matrix
//! `G = T_Φ* U T_Ψ` with entries `⟨U ψⱼ, φᵢ⟩`. This crate constructs such
//! matrices, computes dual frames and pseudo-inverses, relates `G†` back to
//! cross Gram matrices of dual frames, evaluates Schatten-norm inequalities,
//! and produces machine-checkable certificates for approximate duality and
//! perturbation stability.
//!
//! Everything is dense complex double precision over ℂⁿ. Inner products are
//! linear in the first argument: `⟨x, y⟩ = Σ xₖ conj(yₖ)`.

pub mod approx_dual;
pub mod certificate;
pub mod error;
pub mod frame;
pub mod gram;
pub mod inversion;
pub mod io;
pub mod matrix;
pub mod sampling;
pub mod schatten;
pub mod selftest;
pub mod stability;
pub mod tolerance;

pub use certificate::{BoundCheck, Certificate};
pub use error::{Error, Result};
pub use frame::{FrameClass, FrameKind, FrameSystem};
pub use gram::CrossGram;
pub use matrix::{LinearMap, SvdFactorization};
pub use tolerance::TolerancePolicy;

/// The scalar type used throughout: complex double precision.
pub type Scalar = num_complex::Complex64;
