//! Targeted Jacobi eigensolver for one eigenpair of a dense symmetric
//! matrix, with the classical cyclic method as an oracle, convergence
//! diagnostics for scaled diagonally dominant inputs, a spectral clustering
//! pipeline, and an eigenpath tracker.
//!
//! Indices in the library API are 0-based.

pub mod diagnostics;
pub mod error;
pub mod homotopy;
pub mod io;
pub mod matrix;
pub mod reference;
pub mod rotation;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{Permutation, SquareMatrix, SymMatrix};
pub use solver::{solve, EigenpairResult, SolveOptions, Status, SweepRecord};
