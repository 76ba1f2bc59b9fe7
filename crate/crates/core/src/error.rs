use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature rule {rule} cannot integrate against a {belief} belief")]
    IncompatibleRule {
        rule: &'static str,
        belief: &'static str,
    },

    #[error("incompatible supports: {0}")]
    IncompatibleSupport(String),

    #[error("observation {0} lies outside the model's support")]
    OutOfSupport(f64),

    #[error("weight function annihilates the belief (E[w(z)] = {0:e})")]
    DegenerateWeight(f64),

    #[error("evaluation distribution puts mass where the model density is zero")]
    SupportViolation,

    #[error("action kind does not match the loss")]
    ActionKind,

    #[error("{0} belief is not a distribution over a scalar outcome")]
    NotScalar(&'static str),

    #[error("{0}")]
    Unsupported(String),

    #[error("{0} is not finite for this belief")]
    NonFinite(&'static str),

    #[error("matrix is not positive definite")]
    SingularMatrix,

    #[error("duplicate training input {0}")]
    DuplicateInput(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
