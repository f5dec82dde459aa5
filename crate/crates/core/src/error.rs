//! Crate-wide error type.
//!
//! Numerical context (couplings, block length, offending index) is carried as
//! `f64` regardless of the scalar the computation ran in, so that errors stay
//! cheap to construct and format.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error(
        "quadrature for g_{l} at gamma={gamma}, lambda={lambda} did not reach \
         tolerance {requested:e} (panel error estimate {achieved:e})"
    )]
    QuadratureNonconvergence {
        gamma: f64,
        lambda: f64,
        l: i64,
        requested: f64,
        achieved: f64,
    },

    #[error(
        "imaginary part {imag:e} of g_{l} at gamma={gamma}, lambda={lambda} \
         exceeds the quadrature tolerance {tol:e}"
    )]
    ImaginaryResidual {
        gamma: f64,
        lambda: f64,
        l: i64,
        imag: f64,
        tol: f64,
    },

    #[error(
        "correlation table covers |l| <= {l_max}, too small for a block of \
         {block_len} sites (needs |l| <= {needed})"
    )]
    TableTooSmall {
        l_max: usize,
        block_len: usize,
        needed: usize,
    },

    #[error("invalid site set: {0}")]
    InvalidSites(String),

    #[error("block of {block_len} sites exceeds the {cap}-site cap")]
    BlockTooLarge { block_len: usize, cap: usize },

    #[error(
        "probability {p:e} for string index {index} is below the -1e-10 \
         rounding floor; the determinant pipeline is inconsistent"
    )]
    NegativeProbability { index: usize, p: f64 },

    #[error("diagonal distribution invariant violated: {0}")]
    DistributionInvariant(String),

    #[error("entropy curve invariant violated: {0}")]
    CurveInvariant(String),

    #[error("Majorana spectrum invalid: {0}")]
    SpectrumInvalid(String),

    #[error("least-squares design matrix is numerically rank-deficient: {0}")]
    RankDeficient(String),

    #[error(
        "c(lambda) does not cross zero on [{lo}, {hi}] for gamma={gamma} \
         (min |c| = {min_abs_c:e} at lambda = {at})"
    )]
    NoSignChange {
        gamma: f64,
        lo: f64,
        hi: f64,
        min_abs_c: f64,
        at: f64,
    },

    #[error("boundary bisection failed to converge for gamma={gamma}: {detail}")]
    BoundaryRefinement { gamma: f64, detail: String },

    #[error("every grid point of the sweep failed; first failure: {first}")]
    SweepEmpty { first: String },

    #[error("invalid finite chain: {0}")]
    InvalidChain(String),
}
