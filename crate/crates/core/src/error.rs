use thiserror::Error;

#[derive(Debug, Error)]
pub enum HgcError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),
    #[error("not a bijection: {0}")]
    NotBijective(String),
    #[error("resource cap exceeded: {0}")]
    Overflow(String),
    #[error("graph {graph} produced by {op} is not in the codomain basis")]
    MissingCodomain { op: String, graph: String },
    #[error("grading mismatch: {0}")]
    GradingMismatch(String),
    #[error("square-zero violation: {0}")]
    SquareZero(String),
    #[error("truncation window too small: {0}")]
    Window(String),
    #[error("filtration violation: {0}")]
    Filtration(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("input graph is not one-vertex irreducible: {0}")]
    NotOneVertexIrreducible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HgcError>;
