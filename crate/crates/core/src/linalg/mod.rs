//! Linear algebra kernels: banded storage and factorization, small dense
//! eigen-solvers, and subspace iteration for the lowest modes.

pub mod banded;
pub mod dense;
pub mod subspace;

pub use banded::{BandCholesky, SymBand};
