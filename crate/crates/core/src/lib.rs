//! Coexistence of quantum effects on finite-dimensional Hilbert spaces.
//!
//! The crate decides the coexistence relation between effects (Hermitian
//! matrices with spectrum in `[0, 1]`), evaluates maps on effect algebras
//! that preserve it, and reconstructs the unitary or antiunitary symmetry
//! behind a continuous coexistency preserver.

pub mod cli;
pub mod coexistence;
pub mod config;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod io;
mod jacobi;
pub mod preservers;
pub mod random;
pub mod reconstruction;
pub mod strata;

pub use coexistence::{decide, CoexistenceVerdict, Reason, SolverConfig, Verdict, Witness};
pub use error::{Error, Result};
pub use hermitian::{Effect, EigenDecomposition, HermitianMatrix, UnitaryMatrix};
pub use strata::StratumLabel;
