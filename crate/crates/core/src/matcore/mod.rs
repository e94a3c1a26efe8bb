//! Dense matrices and the deterministic kernels the rest of the crate uses.
//!
//! Storage is column-major with 0-based indices everywhere.

mod dense;
pub mod io;
mod qr;
mod svd;

pub use dense::{DenseMatrix, Permutation};
pub use qr::{householder_qr, invert_upper, orthonormal_basis, pivoted_qr, solve_upper, PivotedQr, QrFactors};
pub use svd::{projection_residual, singular_values, spectral_norm};

pub(crate) use dense::axpy;
pub(crate) use qr::{back_substitute, Givens, Reflector};

use crate::error::Result;

/// `permute_columns(A, Π)`: column `i` of the result is column `Π[i]` of `A`.
pub fn permute_columns(a: &DenseMatrix, perm: &Permutation) -> Result<DenseMatrix> {
    a.permute_columns(perm)
}

/// `select_columns(A, idx)`: column `i` of the result is column `idx[i]` of `A`.
pub fn select_columns(a: &DenseMatrix, indices: &[usize]) -> Result<DenseMatrix> {
    a.select_columns(indices)
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.frobenius_norm()
}

pub fn max_abs(a: &DenseMatrix) -> f64 {
    a.max_abs()
}
