//! Special functions, small exact propagators and quadrature.

mod bessel;
mod hermitian;
mod pauli;
mod quadrature;

pub use bessel::{bessel_j, bessel_j_zero, nearest_j1_zero, MAX_ARGUMENT, MAX_ORDER};
pub use hermitian::{check_hermitian, eigh, herm_exp, hermiticity_error, unitarity_error, MAX_DIM};
pub use pauli::{pauli_exp, PauliVector, Unitary2};
pub use quadrature::{integrate, period_average, AVERAGE_TOLERANCE};
