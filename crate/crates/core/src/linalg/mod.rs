//! Dense symmetric eigensolvers.

mod eigen;
mod lu;
mod matrix;
mod tridiag;

pub use eigen::{
    sym_definite_gep_full, sym_definite_gep_kth, sym_eig, sym_eigvals, sym_extreme_eigenvalues,
    sym_kth_eigenpair, sym_kth_eigenvalue, Cholesky, EigenDecomposition, CHOLESKY_PIVOT_TOL,
};
pub use lu::lu_solve;
pub use matrix::{axpy, canonical_sign, dot, norm, normalize, Matrix, SymMatrix};
