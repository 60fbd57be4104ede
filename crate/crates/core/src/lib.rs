//! Quasi-evolution operators `G(tau) = P U(tau)` for interacting chains and
//! their eigenbases of exact state-transmission states.
//!
//! An initial state of the whole chain whose processor-A density matrix at
//! time zero equals processor B's at time `tau` is exactly an eigenvector of
//! `G`; since `G` is unitary such states always form a complete orthonormal
//! set. The crate builds `G` for spin, fermion and boson chains, enumerates
//! that set, and checks the closed-form transfer results for Christandl
//! chains, dressed chains, adiabatic passage and mixed-state transfer.

pub mod adiabatic;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod numerics;
pub mod transmission;

pub use error::{Error, Result};
