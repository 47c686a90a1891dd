use thiserror::Error;

/// Errors raised by constructors, evaluators and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhimixError {
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument 1 + {scale}*z = {re} + {im}i lies on the principal branch cut")]
    BranchCut { scale: f64, re: f64, im: f64 },

    #[error("grid is not uniformly spaced (step {first} vs {found} at index {index})")]
    NonUniformGrid { first: f64, found: f64, index: usize },

    #[error("no closed-form pmf for mixing kind `{0}`")]
    NoClosedForm(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("mixing law failed the class-L factor check (worst violation {worst_violation:e} at c = {c})")]
    NotClassL { c: f64, worst_violation: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, PhimixError>;

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(PhimixError::InvalidParameter(msg()))
    }
}
