//! Dense complex linear algebra on small matrices.

mod density;
mod eig;
mod matrix;

pub use density::{
    partial_trace, permutation_unitary, permute_subsystems, trace_distance, DensityMatrix,
};
pub use eig::{hermitian_eig, hermitian_eigenvalues, Spectrum};
pub use matrix::{kron, kron_all, pauli, ComplexMatrix, I, ONE, ZERO};

/// Inverse square root of a positive definite Hermitian matrix.
pub fn inverse_sqrt(m: &ComplexMatrix) -> crate::error::Result<ComplexMatrix> {
    let s = hermitian_eig(m)?;
    if s.min() <= 0.0 {
        return Err(crate::error::Error::NotPositive {
            min_eigenvalue: s.min(),
        });
    }
    Ok(s.reconstruct_with(|x| 1.0 / x.sqrt()))
}
