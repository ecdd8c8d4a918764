use thiserror::Error;

/// Errors raised by kernel construction, sampling and the coupling checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature resolution: grid spacing {spacing} exceeds {limit}")]
    QuadratureResolution { spacing: f64, limit: f64 },

    #[error("quadrature cross-check failed: deviation {deviation:e} exceeds {tolerance:e}")]
    QuadratureTolerance { deviation: f64, tolerance: f64 },

    #[error("kernel of an even density has imaginary part {0:e}")]
    ImaginaryResidue(f64),

    #[error("site {0} appears more than once")]
    RepeatedSite(usize),

    #[error("site index {index} out of range for {len} sites")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("site lists differ")]
    SiteMismatch,

    #[error("too many sites: {n} > {max}")]
    TooManySites { n: usize, max: usize },

    #[error("matrix is not Hermitian: defect {0:e}")]
    NotHermitian(f64),

    #[error("negative probability mass {mass:e} for pattern {pattern:#b}")]
    NegativeMass { pattern: u64, mass: f64 },

    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("spectral leakage: eigenvalue {eigenvalue} outside [{lo}, {hi}]")]
    SpectralLeakage { eigenvalue: f64, lo: f64, hi: f64 },

    #[error("negative intensity gap {gap:e} at level {level}")]
    NegativeGap { level: u32, gap: f64 },

    #[error("missing site {0}")]
    MissingSite(String),

    #[error("mesh too coarse: cell intensity {intensity} exceeds {limit}")]
    MeshTooCoarse { intensity: f64, limit: f64 },

    #[error("window too large: {size} > {limit}")]
    WindowTooLarge { size: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
