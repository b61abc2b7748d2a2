use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid order {name}={value}: {reason}")]
    InvalidOrder {
        name: &'static str,
        value: i64,
        reason: &'static str,
    },

    #[error("closed-form evaluation requires a nonzero argument")]
    ZeroArgument,

    #[error("polynomial of degree {0:?} has no roots to find")]
    DegreeTooLow(Option<usize>),

    #[error("root finder did not converge after {iterations} iterations (worst residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("recursion step M={step}: constant term {constant:e} does not vanish (limit {limit:e})")]
    RecursionDefect { step: usize, constant: f64, limit: f64 },

    #[error("linear system is ill-conditioned: condition estimate {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("Bezout residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualExceeded { residual: f64, tolerance: f64 },

    #[error("exact solver refused L+M={order_sum} (limit {limit})")]
    CostGuard { order_sum: usize, limit: usize },

    #[error("r is not nonnegative on [0,1]: r({y}) = {value:e}")]
    NotNonnegative { y: f64, value: f64 },

    #[error("conjugate root pairing failed: {0}")]
    ConjugatePairingFailure(String),

    #[error("log-log fit is degenerate: only {usable} of {total} samples above the rounding floor")]
    DegenerateFit { usable: usize, total: usize },

    #[error("cascade depth J={depth} cannot cover |omega| <= {omega_max} (needs omega_max <= 2^J pi)")]
    TruncationTooShallow { depth: u32, omega_max: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error("vanishing-moment deflation left remainder {0:e}")]
    DeflationRemainder(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Variant name, used as the `error` field of structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidOrder { .. } => "InvalidOrder",
            Error::ZeroArgument => "ZeroArgument",
            Error::DegreeTooLow(_) => "DegreeTooLow",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::RecursionDefect { .. } => "RecursionDefect",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::ResidualExceeded { .. } => "ResidualExceeded",
            Error::CostGuard { .. } => "CostGuard",
            Error::NotNonnegative { .. } => "NotNonnegative",
            Error::ConjugatePairingFailure(_) => "ConjugatePairingFailure",
            Error::DegenerateFit { .. } => "DegenerateFit",
            Error::TruncationTooShallow { .. } => "TruncationTooShallow",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::EigenFailure(_) => "EigenFailure",
            Error::DeflationRemainder(_) => "DeflationRemainder",
            Error::Parse(_) => "ParseError",
        }
    }
}
