//! Numeric kernels: hermitian positive definite solves, PSD projection and
//! one-dimensional concave maximization.
//!
//! Dimensions stay small throughout (at most the RIS element count plus one),
//! so dense O(n^3) factorizations are used everywhere.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative residual bound guaranteed by [`solve_hpd`].
pub const HPD_RESIDUAL_TOL: f64 = 1e-10;

/// Relative conjugate-symmetry tolerance enforced by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A square complex matrix validated to be hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Wraps a matrix, checking conjugate symmetry within `1e-12` relative.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation("hermitian matrix must be square".into()));
        }
        let scale = m.norm().max(1.0);
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let d = m[(i, j)] - m[(j, i)].conj();
                if d.norm() > HERMITIAN_TOL * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not hermitian at ({i}, {j}): asymmetry {}",
                        d.norm()
                    )));
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Wraps `(m + m^H) / 2`, discarding any asymmetric rounding noise.
    pub fn symmetrize(m: &DMatrix<Complex64>) -> Self {
        let h = (m + m.adjoint()).scale(0.5);
        Self { inner: h }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.inner
    }
}

/// Solves `A x = b` for hermitian positive definite `A` by Cholesky
/// factorization with one step of iterative refinement.
///
/// Returns [`Error::SingularMatrix`] when the factorization fails or the
/// refined residual still exceeds `1e-10 * ||b||`; callers treat that as the
/// degenerate case and keep their previous iterate.
pub fn solve_hpd(a: &HermitianMatrix, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let m = a.as_matrix();
    if m.nrows() != b.len() {
        return Err(Error::Validation("solve_hpd dimension mismatch".into()));
    }
    let chol = Cholesky::new(m.clone()).ok_or(Error::SingularMatrix)?;
    let mut x = chol.solve(b);
    // One refinement pass tightens the residual for moderately conditioned systems.
    let r = b - m * &x;
    x += chol.solve(&r);
    let resid = (b - m * &x).norm();
    if resid > HPD_RESIDUAL_TOL * b.norm() {
        return Err(Error::SingularMatrix);
    }
    Ok(x)
}

/// Projects a hermitian matrix onto the PSD cone by clamping negative
/// eigenvalues to zero.
pub fn psd_project(a: &HermitianMatrix) -> HermitianMatrix {
    let eig = SymmetricEigen::new(a.as_matrix().clone());
    let clamped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| Complex64::new(v.max(0.0), 0.0)),
    );
    let recon = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.adjoint();
    HermitianMatrix::symmetrize(&recon)
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &HermitianMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(a.as_matrix().clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

/// Hermitian square root factor `L` with `L L^H = A` for PSD `A`
/// (negative rounding-level eigenvalues are clamped to zero).
pub fn psd_sqrt(a: &HermitianMatrix) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(a.as_matrix().clone());
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

/// Maximizes a concave function on `[lo, hi]` by golden-section search down to
/// an interval of width `tol`, then returns the best of the interior estimate
/// and the interval endpoints.
pub fn maximize_concave_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    assert!(hi >= lo && tol > 0.0);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for (x, v) in [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}
