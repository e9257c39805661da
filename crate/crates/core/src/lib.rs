//! Ground-state quantum computation on particle chains.
//!
//! A circuit of `M` qubits and `N` steps becomes a Hamiltonian whose zero
//! energy ground states hold the whole history of the computation. The
//! crate builds that Hamiltonian, computes its low-lying spectrum, checks
//! that ground states develop like the circuit, evaluates gap bounds and
//! models the final-row detection schemes.

// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod detection;
pub mod eigensolve;
pub mod error;
pub mod generate;
pub mod hamiltonian;
pub mod lattice;
pub mod semantics;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
