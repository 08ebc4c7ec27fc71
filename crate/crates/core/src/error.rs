use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("polytope is not projective")]
    NotProjective,
    #[error("polytope is not reflexive")]
    NotReflexive,
    #[error("polytope is not smooth: {0}")]
    NotSmooth(String),
    #[error("matrix is not totally unimodular: {0}")]
    NotTotallyUnimodular(String),
    #[error("no row split exists for rows {0:?}")]
    NoRowSplit(Vec<usize>),
    #[error("matrix has no identity block")]
    NoIdentityBlock,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("search bound exceeded: {0}")]
    SearchBound(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("empty slice")]
    EmptySlice,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("corpus entry `{id}`: {msg}")]
    Corpus { id: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
