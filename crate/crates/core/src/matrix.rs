//! Dense complex matrices: SVD, pseudo-inverse, norms, rank, and subspace
//! comparisons. Every other module sits on top of this one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::TolerancePolicy;

/// A dense complex matrix, i.e. a linear map ℂᶜᵒˡˢ → ℂʳᵒʷˢ.
///
/// Entries are validated to be finite at construction. Row-major input
/// orderings are accepted by [`LinearMap::from_rows`]; internally the data
/// lives in a [`DMatrix`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    mat: DMatrix<Complex64>,
}

impl LinearMap {
    /// Wraps a matrix, rejecting NaN or infinite entries.
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                let z = mat[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(LinearMap { mat })
    }

    /// Builds from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds from real row-major data.
    pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &complex)
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinearMap {
            mat: DMatrix::zeros(rows, cols),
        }
    }

    /// Square matrix with the given real diagonal.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        LinearMap {
            mat: DMatrix::from_diagonal(&v),
        }
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.mat.column(j).into_owned()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> LinearMap {
        LinearMap {
            mat: &self.mat * factor,
        }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.cols() {
            return Err(Error::dim(format!(
                "map takes vectors of length {}, got {}",
                self.cols(),
                v.len()
            )));
        }
        Ok(&self.mat * v)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Operator norm σ₁ (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.mat.is_empty() {
            return 0.0;
        }
        let (_, sigma, _) = jacobi_svd(&self.mat, false);
        if sigma.is_empty() {
            0.0
        } else {
            sigma.max()
        }
    }

    /// Singular value decomposition with thin factors.
    pub fn svd(&self) -> Result<SvdFactorization> {
        self.svd_with(&TolerancePolicy::default())
    }

    /// SVD with the rank cutoff frozen from `pol`.
    pub fn svd_with(&self, pol: &TolerancePolicy) -> Result<SvdFactorization> {
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let z = self.mat[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let (u, sigma, v_t) = jacobi_svd(&self.mat, true);
        let sigma_max = if sigma.is_empty() { 0.0 } else { sigma.max() };
        Ok(SvdFactorization {
            u,
            sigma,
            v_t,
            rank_tolerance: pol.relative_rank_cutoff * sigma_max,
            rank_cutoff_ratio: pol.relative_rank_cutoff,
        })
    }

    /// Moore–Penrose pseudo-inverse via SVD with the policy's rank cutoff.
    pub fn pseudo_inverse(&self, pol: &TolerancePolicy) -> Result<LinearMap> {
        Ok(self.svd_with(pol)?.pseudo_inverse())
    }

    /// Count of singular values above `cutoff · σ₁`.
    pub fn numeric_rank(&self, pol: &TolerancePolicy) -> Result<usize> {
        Ok(self.svd_with(pol)?.rank())
    }

    /// Inverse of a square, numerically full-rank, well-conditioned matrix.
    pub fn try_inverse(&self, pol: &TolerancePolicy) -> Result<LinearMap> {
        if !self.is_square() {
            return Err(Error::dim(format!(
                "inverse of a {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        let svd = self.svd_with(pol)?;
        if svd.rank() < self.rows() {
            return Err(Error::Singular(format!(
                "rank {} of {}",
                svd.rank(),
                self.rows()
            )));
        }
        if svd.condition_number() > pol.condition_limit {
            return Err(Error::Singular(format!(
                "condition number {:.3e} exceeds the limit {:.3e}",
                svd.condition_number(),
                pol.condition_limit
            )));
        }
        Ok(svd.pseudo_inverse())
    }

    /// Whether the matrix is square and numerically invertible under `pol`.
    pub fn is_invertible(&self, pol: &TolerancePolicy) -> bool {
        self.try_inverse(pol).is_ok()
    }

    /// Orthogonal projector onto the range (equals `A A†`).
    pub fn range_projector(&self, pol: &TolerancePolicy) -> Result<LinearMap> {
        Ok(self.svd_with(pol)?.range_projector())
    }

    /// Orthogonal projector onto the kernel (equals `I − A† A`).
    pub fn kernel_projector(&self, pol: &TolerancePolicy) -> Result<LinearMap> {
        Ok(self.svd_with(pol)?.kernel_projector())
    }

    /// Distance to the other matrix in operator norm.
    pub fn distance(&self, other: &LinearMap) -> f64 {
        (self - other).operator_norm()
    }

    /// Operator-norm distance to the identity (requires a square matrix).
    pub fn distance_to_identity(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let eye = LinearMap::identity(n);
        if self.is_square() {
            self.distance(&eye)
        } else {
            f64::INFINITY
        }
    }
}

macro_rules! map_binop {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl std::ops::$trait<&LinearMap> for &LinearMap {
            type Output = LinearMap;
            fn $fn(self, rhs: &LinearMap) -> LinearMap {
                LinearMap {
                    mat: &self.mat $op &rhs.mat,
                }
            }
        }
    };
}

map_binop!(Add, add, +);
map_binop!(Sub, sub, -);
map_binop!(Mul, mul, *);

/// Thin SVD `A = U Σ V*` with singular values in nonincreasing order.
///
/// `rank_tolerance` is the absolute threshold `cutoff · σ₁` frozen at
/// factorization time; rank, pseudo-inverse, and projectors all use it.
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    u: DMatrix<Complex64>,
    sigma: DVector<f64>,
    v_t: DMatrix<Complex64>,
    rank_tolerance: f64,
    rank_cutoff_ratio: f64,
}

impl SvdFactorization {
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn left_vectors(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    /// Adjoint of the right singular vector matrix.
    pub fn right_vectors_adjoint(&self) -> &DMatrix<Complex64> {
        &self.v_t
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v_t.ncols()
    }

    pub fn rank(&self) -> usize {
        self.sigma
            .iter()
            .filter(|&&s| s > self.rank_tolerance)
            .count()
    }

    /// σ₁, or zero for an empty spectrum.
    pub fn operator_norm(&self) -> f64 {
        if self.sigma.is_empty() {
            0.0
        } else {
            self.sigma.max()
        }
    }

    /// Smallest singular value counted in the rank, or zero for rank 0.
    pub fn sigma_min_positive(&self) -> f64 {
        let r = self.rank();
        if r == 0 {
            0.0
        } else {
            self.sigma[r - 1]
        }
    }

    /// σ₁ / σ_r over the numeric rank r; infinite for rank 0.
    pub fn condition_number(&self) -> f64 {
        let r = self.rank();
        if r == 0 {
            f64::INFINITY
        } else {
            self.sigma[0] / self.sigma[r - 1]
        }
    }

    /// True when some singular value sits within a decade of the rank cliff,
    /// i.e. in `[cutoff·σ₁/10, cutoff·σ₁·10]`. Rank decisions are then
    /// unreliable and closed-range conclusions should be flagged.
    pub fn rank_is_ambiguous(&self) -> bool {
        let lo = self.rank_tolerance / 10.0;
        let hi = self.rank_tolerance * 10.0;
        self.sigma.iter().any(|&s| s >= lo && s <= hi && s > 0.0)
    }

    /// `A = U Σ V*` put back together.
    pub fn reconstruct(&self) -> LinearMap {
        let k = self.sigma.len();
        let mut scaled = self.v_t.clone();
        for i in 0..k {
            let row = self.v_t.row(i) * Complex64::new(self.sigma[i], 0.0);
            scaled.set_row(i, &row);
        }
        LinearMap {
            mat: &self.u * scaled,
        }
    }

    /// `A† = V Σ_r⁻¹ U*` with Σ truncated at the rank tolerance.
    pub fn pseudo_inverse(&self) -> LinearMap {
        let k = self.sigma.len();
        let mut inv = DMatrix::<Complex64>::zeros(self.cols(), self.rows());
        for i in 0..k {
            let s = self.sigma[i];
            if s > self.rank_tolerance {
                let vi = self.v_t.row(i).adjoint(); // column of V
                let ui = self.u.column(i);
                inv += (vi * ui.adjoint()) / Complex64::new(s, 0.0);
            }
        }
        LinearMap { mat: inv }
    }

    /// Projector onto the range, `Σ uᵢ uᵢ*` over the numeric rank.
    pub fn range_projector(&self) -> LinearMap {
        let r = self.rank();
        let ur = self.u.columns(0, r);
        LinearMap {
            mat: ur * ur.adjoint(),
        }
    }

    /// Projector onto the kernel, `I − Σ vᵢ vᵢ*`.
    pub fn kernel_projector(&self) -> LinearMap {
        let r = self.rank();
        let vr = self.v_t.rows(0, r).adjoint();
        LinearMap {
            mat: DMatrix::identity(self.cols(), self.cols()) - &vr * vr.adjoint(),
        }
    }

    /// Orthonormal basis of the range as matrix columns.
    pub fn range_basis(&self) -> LinearMap {
        let r = self.rank();
        LinearMap {
            mat: self.u.columns(0, r).into_owned(),
        }
    }

    /// Orthonormal basis of the kernel's orthogonal complement (= range of A*).
    pub fn corange_basis(&self) -> LinearMap {
        let r = self.rank();
        LinearMap {
            mat: self.v_t.rows(0, r).adjoint(),
        }
    }

    pub fn rank_cutoff_ratio(&self) -> f64 {
        self.rank_cutoff_ratio
    }
}

/// Thin SVD via one-sided (Hestenes) Jacobi rotations on the columns.
///
/// Sweeps orthogonalize column pairs with exact 2×2 unitary rotations until
/// every pair is numerically orthogonal; singular values are the final
/// column norms. Quadratically convergent and accurate to high relative
/// precision, which the certificate suites depend on. Wide matrices are
/// handled through the adjoint. With `want_vectors = false` only the
/// singular values are meaningful.
fn jacobi_svd(
    a: &DMatrix<Complex64>,
    want_vectors: bool,
) -> (DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>) {
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return (
            DMatrix::zeros(n, 0),
            DVector::zeros(0),
            DMatrix::zeros(0, m),
        );
    }
    if n < m {
        let (u, sigma, v_t) = jacobi_svd(&a.adjoint(), want_vectors);
        return (v_t.adjoint(), sigma, u.adjoint());
    }

    let mut w = a.clone();
    let mut v = DMatrix::<Complex64>::identity(m, m);
    // Column-pair orthogonality threshold; quadratic convergence makes the
    // sweep cap generous.
    let tol = 1e-15;
    for _sweep in 0..64 {
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let mut aa = 0.0f64;
                let mut bb = 0.0f64;
                let mut g = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    aa += wi.norm_sqr();
                    bb += wj.norm_sqr();
                    g += wi.conj() * wj;
                }
                let gn = g.norm();
                if aa == 0.0 || bb == 0.0 || gn <= tol * (aa * bb).sqrt() {
                    continue;
                }
                rotated = true;
                // Diagonalize the 2x2 Gram [[a, g], [conj(g), b]]: absorb
                // the phase of g, then a real Jacobi rotation.
                let phase_conj = (g / gn).conj();
                let tau = (bb - aa) / (2.0 * gn);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = phase_conj * s;
                let cp = phase_conj * c;
                for k in 0..n {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)];
                    w[(k, i)] = wi * c - wj * sp;
                    w[(k, j)] = wi * s + wj * cp;
                }
                if want_vectors {
                    for k in 0..m {
                        let vi = v[(k, i)];
                        let vj = v[(k, j)];
                        v[(k, i)] = vi * c - vj * sp;
                        v[(k, j)] = vi * s + vj * cp;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    let norms: Vec<f64> = (0..m).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut sigma = DVector::zeros(m);
    let mut u = DMatrix::<Complex64>::zeros(n, m);
    let mut v_sorted = DMatrix::<Complex64>::zeros(m, m);
    for (slot, &col) in order.iter().enumerate() {
        let s = norms[col];
        sigma[slot] = s;
        if s > 0.0 {
            let scaled = w.column(col) / Complex64::new(s, 0.0);
            u.set_column(slot, &scaled);
        }
        if want_vectors {
            v_sorted.set_column(slot, &v.column(col));
        }
    }
    (u, sigma, v_sorted.adjoint())
}

/// Whether the ranges of `a` and `b` agree as subspaces, by comparing the
/// orthogonal projectors `AA†` and `BB†` in operator norm.
pub fn range_equal(a: &LinearMap, b: &LinearMap, pol: &TolerancePolicy) -> Result<bool> {
    if a.rows() != b.rows() {
        return Err(Error::dim(format!(
            "range comparison needs equal row counts, got {} and {}",
            a.rows(),
            b.rows()
        )));
    }
    let pa = a.range_projector(pol)?;
    let pb = b.range_projector(pol)?;
    Ok(pa.distance(&pb) <= pol.equality_tolerance)
}

/// Operator-norm distance between the range projectors of `a` and `b`.
pub fn range_distance(a: &LinearMap, b: &LinearMap, pol: &TolerancePolicy) -> Result<f64> {
    if a.rows() != b.rows() {
        return Err(Error::dim("range comparison needs equal row counts"));
    }
    Ok(a.range_projector(pol)?.distance(&b.range_projector(pol)?))
}

/// Whether the kernels of `a` and `b` agree as subspaces.
pub fn kernel_equal(a: &LinearMap, b: &LinearMap, pol: &TolerancePolicy) -> Result<bool> {
    Ok(kernel_distance(a, b, pol)? <= pol.equality_tolerance)
}

/// Operator-norm distance between the kernel projectors of `a` and `b`.
pub fn kernel_distance(a: &LinearMap, b: &LinearMap, pol: &TolerancePolicy) -> Result<f64> {
    if a.cols() != b.cols() {
        return Err(Error::dim("kernel comparison needs equal column counts"));
    }
    Ok(a.kernel_projector(pol)?.distance(&b.kernel_projector(pol)?))
}
