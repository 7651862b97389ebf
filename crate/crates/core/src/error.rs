use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("right-hand side is not in the column space")]
    NoSolution,

    #[error("ideal is not admissible: {0}")]
    NonAdmissible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("relation violated: {0}")]
    RelationViolation(String),

    #[error("decomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("invalid split plan: {0}")]
    InvalidPlan(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("syzygy orbit exceeded {0} classes")]
    OrbitUnbounded(usize),

    #[error("syzygy formula check failed: {0}")]
    FormulaCheck(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
