//! Random two-qubit-gate walks on `N` qubits.
//!
//! Each step picks an ordered qubit pair `(c, t)`, applies independent
//! single-qubit gates to both, then `CNOT[c, t]`. Three engines follow the
//! walk: a dense state vector, a stabilizer tableau (Clifford gates only)
//! and the Markov chain on Pauli-support sizes that governs expected purity.

// `!(x >= 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod convergence;
pub mod density;
pub mod ensemble;
pub mod error;
pub mod gates;
pub mod gf2;
pub mod mat2;
pub mod oracles;
pub mod pauli;
pub mod randomizing;
pub mod stabilizer;
pub mod statevector;
pub mod topology;

pub use error::{Error, Result};
