use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index {index} out of range for size {size}")]
    Index { index: usize, size: usize },
    #[error("index set must be strictly increasing: {0:?}")]
    UnsortedIndex(Vec<usize>),
    #[error("matrix does not have full row rank (rank {rank}, expected {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("point is not on the Grassmannian (Plücker residual {residual:e})")]
    NotOnGrassmannian { residual: f64 },
    #[error("all coordinates are zero")]
    ZeroVector,
    #[error("projection has rank zero, no basis exists")]
    EmptyBasis,
    #[error("not a projection matrix: {0}")]
    NotProjection(String),
    #[error("degree table covers n <= {max_n}, got d={d}, n={n}")]
    OutOfTable { d: usize, n: usize, max_n: usize },
    #[error("operation requires {expected}, got d={d}, n={n}")]
    WrongDimension { expected: &'static str, d: usize, n: usize },
    #[error("{count} subsets exceed the enumeration cap of {cap}")]
    EnumerationTooLarge { count: usize, cap: usize },
    #[error("minor x_{subset} = {value} is not positive")]
    NotInPositiveChart { subset: String, value: f64 },
    #[error("chart entry ({row}, {col}) is zero")]
    ZeroEntry { row: usize, col: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no restart reached stationarity: {0}")]
    ConvergenceFailure(String),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("{0} representation cannot be inverted")]
    NotInvertible(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Index { .. } | Error::UnsortedIndex(_) => "IndexError",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::NotOnGrassmannian { .. } => "NotOnGrassmannian",
            Error::ZeroVector => "ZeroVector",
            Error::EmptyBasis => "EmptyBasis",
            Error::NotProjection(_) => "NotProjection",
            Error::OutOfTable { .. } => "OutOfTable",
            Error::WrongDimension { .. } => "WrongDimension",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::NotInPositiveChart { .. } => "NotInPositiveChart",
            Error::ZeroEntry { .. } => "ZeroEntry",
            Error::Domain(_) => "DomainError",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::EmptyGraph => "EmptyGraph",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::NotInvertible(_) => "NotInvertible",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
