//! Numerics for the cyclic trigonal family y³ = x(x−s)(x−b₁)(x−b₂), its genus-2
//! normalization at s = 0 and the elliptic curve y(y−s) = x³: Abelian integrals,
//! period matrices, theta, sigma and al functions, and the s → 0 degeneration.

pub mod cli;
pub mod curves;
pub mod degen;
pub mod elliptic;
pub mod numkernel;
pub mod periods;
pub mod sigma;
pub mod theta;

pub use numkernel::{ComplexMatrix, QuadratureConfig, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("quadrature or series did not converge: {0}")]
    NonConvergence(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("Gamma pole at {0}")]
    Pole(f64),
    #[error("invalid parameters: {0}")]
    InvalidParam(String),
    #[error("sheet ambiguity: {0}")]
    SheetAmbiguity(String),
    #[error("differential evaluated at a branch point")]
    AtBranchPoint,
    #[error("point outside the chart at infinity: {0}")]
    OutOfChart(String),
    #[error("vector not in lattice (residual {0:e})")]
    NotInLattice(f64),
    #[error("not a half period (residual {0:e})")]
    NotHalfPeriod(f64),
    #[error("characteristic rejected by the divisor test: {0}")]
    AmbiguousCharacteristic(String),
    #[error("theta truncation radius exceeds cap: {0}")]
    TruncationOverflow(String),
    #[error("point lies on the theta divisor (|sigma| = {0:e})")]
    OnThetaDivisor(f64),
    #[error("argument lies on the lattice")]
    OnLattice,
    #[error("x-constant lift failed: {0}")]
    LiftFailure(String),
}
