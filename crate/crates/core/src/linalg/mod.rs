//! Dense complex linear algebra: Jacobi eigensolver, SVD, PSD factorizations.
//!
//! Everything here is dependency-free apart from `num-complex` and sized for
//! matrices up to a few hundred rows.

mod eigen;
mod factor;
mod matrix;
mod svd;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use factor::{cholesky_psd, pinv_diag, sqrt_psd, EIGENVALUE_CLAMP, PSD_TOL};
pub use matrix::{inner, vec_norm, ComplexMatrix};
pub use svd::{operator_norm, svd, SvdResult};

pub(crate) use svd::complete_orthonormal;
