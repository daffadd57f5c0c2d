use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported Cartan type `{0}`")]
    UnsupportedType(String),
    #[error("invalid subset of simple roots: {0}")]
    InvalidSubset(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a ring element that is not a scalar")]
    NonScalarDivision,
    #[error("presentation mismatch: `{0}` vs `{1}`")]
    PresentationMismatch(String, String),
    #[error("degree {degree} exceeds the bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("cardinality mismatch: |I| = {0}, |J| = {1}")]
    CardinalityMismatch(usize, usize),
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("singular matrix")]
    Singular,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("missing table entry for `{0}`")]
    MissingTableEntry(String),
    #[error("not a partial Hasse generator on `{0}`")]
    NotGenerator(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
