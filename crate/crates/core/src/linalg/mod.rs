//! Dense kernels sized for small orders (M <= 64): a complex Hermitian
//! Jacobi eigensolver and an Aberth-Ehrlich polynomial root finder.

mod hermitian;
mod poly;

pub use hermitian::{eigh, EigenDecomposition, HermitianMatrix, HERMITIAN_TOLERANCE};
pub use poly::{refine_double_root, roots, ComplexPolynomial, ROOT_ITERATION_BUDGET};
