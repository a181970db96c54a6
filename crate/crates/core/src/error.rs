use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("derivative order {order} exceeds declared maximum {max} for {activation}")]
    OrderExceeded {
        activation: String,
        order: usize,
        max: usize,
    },

    #[error("derivative of order {order} of {activation} is ambiguous at the kink z = {at}; pick a branch")]
    AmbiguousAtKink {
        activation: String,
        order: usize,
        at: f64,
    },

    #[error("{what} of {activation} is not integrable")]
    NotIntegrable { activation: String, what: String },

    #[error("missing oracle: {0}")]
    MissingOracle(String),

    #[error("missing tail bound: {0}")]
    MissingTailBound(String),

    #[error("linear solve ill-conditioned: residual {residual:e}, condition estimate {condition:e}")]
    IllConditioned { residual: f64, condition: f64 },

    #[error("atom {index} has reach {reach} outside radius {radius}")]
    AtomOutsideRadius {
        index: usize,
        reach: f64,
        radius: f64,
    },

    #[error("conversion expects activation {expected}, found {found}")]
    WrongActivation { expected: String, found: String },

    #[error("unknown activation '{0}'")]
    UnknownActivation(String),

    #[error("no construction converts {from} to {to}")]
    NoConstruction { from: String, to: String },

    #[error("conjugate symmetry violated: {0}")]
    SymmetryViolated(String),

    #[error("quadrature did not converge: estimated error {estimate:e} after {subdivisions} subdivisions")]
    NonConvergence { estimate: f64, subdivisions: usize },

    #[error("degenerate truncation: {0}")]
    DegenerateTruncation(String),

    #[error("substitution check failed: max deviation {deviation:e} on [{lo}, {hi}]")]
    GammaMismatch { deviation: f64, lo: f64, hi: f64 },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
