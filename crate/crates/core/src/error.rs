use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed matrix text: {0}")]
    Malformed(String),

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("eigenvalue {0:e} is below the PSD tolerance")]
    NegativeEigenvalue(f64),

    #[error("zero eigenvalue raised to a negative power")]
    ZeroToNegativePower,

    #[error("matrix is not irreducible")]
    NotIrreducible,

    #[error("matrix is not doubly nonnegative")]
    NotDn,

    #[error("index ({i}, {j}) out of range for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("dimension {n} is below the required minimum {min}")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("invalid sign change matrix: {0}")]
    InvalidW(String),

    #[error("matrix has {0} distinct eigenvalues, at most 3 allowed")]
    TooManyEigenvalues(usize),

    #[error("largest eigenvalue is not simple")]
    RepeatedTopEigenvalue,

    #[error("rank {rank} must lie in 1..={n}")]
    BadRank { rank: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scan configuration: {0}")]
    BadScan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
