//! Small dense and banded linear algebra: Jacobi singular values and
//! symmetric eigenvalues via tridiagonal QL.

mod eig;
mod matrix;
mod svd;

pub use eig::{eig_sym, eig_sym_band, eig_tridiagonal};
pub use matrix::{DenseMatrix, SymBandMatrix};
pub use svd::singular_values;
