use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("no colouring of [{s}] without a homogeneous {h}-set found after {tries} tries")]
    NotFound { s: usize, h: usize, tries: usize },

    #[error("certification refused: {0}")]
    CertificationRefused(String),

    /// Rounded parameters violate at least one of the product inequalities.
    #[error("inequality check failed: {}", failing.join(", "))]
    InequalityFails { failing: Vec<&'static str> },

    #[error("insufficient stability at sigma={sigma}: best window has {stable_count} stable rows, need {required}")]
    InsufficientStability {
        sigma: String,
        stable_count: usize,
        required: usize,
    },

    #[error("size budget exceeded: need {} vertices, cap is {cap}", required.map_or("more than 2^64".to_string(), |r| r.to_string()))]
    SizeBudget { required: Option<u64>, cap: u64 },

    /// Search stopped at the node budget; `lower_bound` is what was found so far.
    #[error("search budget exhausted after {nodes} nodes (lower bound {lower_bound})")]
    BudgetExceeded {
        nodes: u64,
        lower_bound: usize,
        witness: Vec<usize>,
    },

    #[error("invalid very-simple tree: {0}")]
    InvalidTree(crate::extract::TreeViolation),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
