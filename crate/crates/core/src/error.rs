use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the matrix primitives, the solvers and the file readers.
///
/// Indices carried by variants are 0-based; the CLI converts them to 1-based
/// before printing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix order must be at least 1")]
    EmptyMatrix,
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("index {index} out of range for order {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("rotation plane needs two distinct indices, got ({0}, {0})")]
    SamePlaneIndex(usize),
    #[error("input is not symmetric: |a({row},{col}) - a({col},{row})| = {diff:e}")]
    AsymmetricInput { row: usize, col: usize, diff: f64 },
    #[error("diagonal entry {0} is zero")]
    ZeroDiagonal(usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("eigenvector was not accumulated (set want_vector)")]
    VectorNotAccumulated,
    #[error("cyclic Jacobi did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("a relative gap needs at least two eigenvalues")]
    SingleEigenvalue,
    #[error("relative distance undefined for two zeros")]
    BothZero,
    #[error("diagonal entry {0} equals the target diagonal entry")]
    DegenerateGapHat(usize),
    #[error("bound undefined for a zero relative gap")]
    BoundUndefined,
    #[error("rate fit needs at least 3 usable values, got {0}")]
    InsufficientHistory(usize),
    #[error("history value {0} is not positive")]
    NonpositiveValues(usize),
    #[error("vertex {0} has zero degree")]
    IsolatedVertex(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("relative gap {gap:e} at t = {t} is below the tracking floor")]
    CollapsedGap { t: f64, gap: f64 },
    #[error("homotopy tracker exceeded {0} steps")]
    StepLimit(usize),
    #[error("homotopy tracker stalled at t = {t} solving eigenpair {m}")]
    TrackerStalled { t: f64, m: usize },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("matrix file is not symmetric")]
    NotSymmetric,
    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
