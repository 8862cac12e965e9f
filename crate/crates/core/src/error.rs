use thiserror::Error;

/// Errors raised by the solvers, envelope constructors and adapters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeakError {
    /// `u_k` exceeds the certified bound `h_k(beta_k^k)`: the pair does not
    /// dominate the sequence at `k`.
    #[error("envelope violated at k={k}: term {term} exceeds bound {bound}")]
    EnvelopeViolation { k: u64, term: f64, bound: f64 },

    /// No index with `u_k > h_k(0)` was found in the scan window after the
    /// decreasing-from index, so the truncation index was never assigned.
    #[error("no useful index in [{from}, {}]: envelope is not usefully decreasing", from + scan_limit)]
    NoUsefulIndex { from: u64, scan_limit: u64 },

    #[error("value {y} outside the range [{lo}, {hi}] of the function")]
    OutOfRange { y: f64, lo: f64, hi: f64 },

    #[error("cannot combine an empty family of envelopes")]
    EmptyFamily,

    #[error("invalid certificate bracket: {0}")]
    InvalidBracket(String),

    #[error("inconclusive tail bound {tail_bound}: no index of the prefix dominates the tail")]
    InvalidTailBound { tail_bound: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("term {k} is not finite")]
    NonFiniteTerm { k: u64 },

    #[error("integer overflow at step {step}")]
    Overflow { step: u64 },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("P is not a solution of the discrete Lyapunov inequality for A")]
    NotLyapunov,

    #[error("q = {q} must exceed (1 - lambda^2)^-2 = {threshold}")]
    QTooSmall { q: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cross-check against brute force failed: {0}")]
    CrossCheckFailed(String),
}

pub type Result<T, E = PeakError> = std::result::Result<T, E>;
