use thiserror::Error;

use crate::funapprox::Interval;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Chebyshev approximation did not resolve the function below degree {max_degree}")]
    NonConvergence { max_degree: usize },

    #[error("function returned a non-finite value at {at}")]
    NonFinite { at: f64 },

    #[error("point {t} lies outside the domain {domain}")]
    OutOfDomain { t: f64, domain: Interval },

    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: Interval, right: Interval },

    #[error("cross approximation reached rank {max_rank} with pivot ratio {ratio:.3e} above tolerance")]
    RankOverflow { max_rank: usize, ratio: f64 },

    #[error("no singular value survives the cut-off")]
    EmptyExpansion,

    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{name}`: applying the kernel to the exact solution misses the right-hand side by {rel_err:.3e} (relative)")]
    Inconsistent { name: String, rel_err: f64 },

    #[error("exact solution has zero norm")]
    ZeroExactNorm,

    #[error("noise function has zero norm")]
    ZeroNoiseNorm,
}
