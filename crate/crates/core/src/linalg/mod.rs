//! Dense complex linear algebra for small operators.

mod eigen;
mod matrix;
mod ops;

pub use eigen::{eig_hermitian, is_psd, min_eigenvalue, Eigen, MAX_SWEEPS, OFF_DIAGONAL_THRESHOLD};
pub use matrix::{ComplexMatrix, HermitianOperator, HERMITIAN_REPAIR_TOLERANCE};
pub use ops::{kron, partial_trace, partial_transpose, Subsystem};
