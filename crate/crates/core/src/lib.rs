//! Non-Hermitian dynamics on a unitary gate model.
//!
//! A non-unitary evolution `exp(−iHt)` of a single qubit is embedded into a
//! two-qubit unitary (system ⊗ ancilla) and recovered by post-selecting the
//! ancilla. On top of that the crate computes quantum Fisher information near
//! exceptional points, sweeps it under single-qubit noise and exports the
//! circuits as OpenQASM 2.0.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod dilation;
pub mod error;
pub mod exec;
pub mod hamiltonians;
pub mod linalg;
pub mod noise;
pub mod qasm;
pub mod qfi;

pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::{CMatrix, C64};
