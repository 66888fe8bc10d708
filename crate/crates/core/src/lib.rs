//! Spectral fractional powers of doubly nonnegative matrices: eigensolver,
//! exponential polynomial analysis of entries, sign change matrices, class
//! enumeration, mechanical certification of critical exponents, and
//! randomized experiments.

pub mod certify;
pub mod cli;
pub mod enumerate;
pub mod error;
pub mod experiments;
pub mod exppoly;
pub mod matcore;
pub mod signchange;

pub use error::{Error, Result};
pub use matcore::{spectral_decompose, SpectralDecomposition, SymMatrix, Tolerances};
