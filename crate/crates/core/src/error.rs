use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix must be square with dim >= 1 (got {rows}x{cols})")]
    BadShape { rows: usize, cols: usize },

    #[error("spectrum out of [0,1]: eigenvalue {eigenvalue}")]
    SpectrumOutOfRange { eigenvalue: f64 },

    #[error("matrix is not unitary (||U*U - I||_F = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("empty block list")]
    EmptyBlockList,

    #[error("invalid stratum (p={p}, q={q}) for dim {dim}")]
    InvalidStratum { p: usize, q: usize, dim: usize },

    #[error("invalid certificate: {constraint} violated by {margin:e}")]
    InvalidCertificate { constraint: String, margin: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("map is inconsistent: image of 0 is {dist_zero:e} from 0 and {dist_identity:e} from I")]
    InconsistentMap { dist_zero: f64, dist_identity: f64 },

    #[error("probe {probe} has an image that is not a rank-one projection (deviation {deviation:e})")]
    NonProjectionImage { probe: usize, deviation: f64 },

    #[error("probe images are not orthogonal (gram deviation {deviation:e})")]
    NonOrthogonalImages { deviation: f64 },

    #[error("phase fit failed: {0}")]
    PhaseFitFailure(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
