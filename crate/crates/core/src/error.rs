use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("partition infeasible: disk {0} is not inside any covering disk")]
    PartitionInfeasible(usize),

    #[error("insufficient disks in generation {k}: first uncovered n = {n}")]
    InsufficientDisks { k: usize, n: u128 },

    #[error("evaluation at the singular center ({re}, {im}) of a point flux")]
    SingularEval { re: f64, im: f64 },

    #[error("grid has no interior nodes")]
    EmptyGrid,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("inner solve broke down after {iterations} outer iterations")]
    Breakdown { iterations: usize },

    #[error("matrix of dimension {0} is too large for the dense solver")]
    TooLarge(usize),

    #[error("zero vector")]
    ZeroVector,

    #[error("field is not harmonic on the integration circle")]
    SingularOnCircle,

    #[error("grid singularity: {0}")]
    GridSingularity(String),

    #[error("extension is not subharmonic: laplacian {value:e} at |z| = {radius}")]
    NotSubharmonic { radius: f64, value: f64 },

    #[error("region {0} cannot hold a counter-charge of radius >= 2h")]
    RegionTooSmall(usize),

    #[error("band limit violated: {0:e} of the energy lies outside the mode window")]
    BandLimitViolated(f64),

    #[error("no multiplier within tolerance up to the scan limit")]
    NotFound,

    #[error("pigeonhole guarantee violated: counting bound holds but no multiplier was found")]
    GuaranteeViolated,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
