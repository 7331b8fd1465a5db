use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site count {sites} outside supported range {min}..={max}")]
    SiteCount { sites: usize, min: usize, max: usize },

    #[error("site {site} outside 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("site {0} listed more than once")]
    DuplicateSite(usize),

    #[error("site count {0} must be even")]
    OddSiteCount(usize),

    #[error("matrix dimension {0} is not a power of two in 2..=4096")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("inverse temperature must be non-negative, got {0}")]
    NegativeBeta(f64),

    #[error("spectral decomposition failed its accuracy check: {0}")]
    Spectral(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid eta vector: {0}")]
    InvalidEta(String),

    #[error("order {n} outside supported range 1..={max}")]
    OrderOutOfRange { n: usize, max: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("times must be finite and strictly increasing: {0:?}")]
    TimesNotIncreasing(Vec<f64>),

    #[error("unknown observable label `{0}`")]
    UnknownObservable(String),

    #[error("duplicate observable label `{0}`")]
    DuplicateObservable(String),

    #[error("correlation has imaginary residue {0:.3e}, expected a real value")]
    ImaginaryResidual(f64),

    #[error("non-finite value in series `{0}`")]
    NonFinite(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("template `{template}` violates time ordering at grid point {point}: {times:?}")]
    GridOrdering { template: String, point: f64, times: Vec<f64> },

    #[error("symmetry transform is singular")]
    SingularTransform,

    #[error("expected a {expected} transform, got {found}")]
    WrongTransformKind { expected: String, found: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
