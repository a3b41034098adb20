use thiserror::Error;

/// Errors raised by the representation and verification pipelines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("su(N) requires N >= 2, got N = {0}")]
    RankTooSmall(usize),

    #[error("site index {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("Casimir pair needs two distinct sites, got p = q = {0}")]
    CoincidentSites(usize),

    #[error("need at least {required} sites, got {got}")]
    TooFewSites { required: usize, got: usize },

    #[error("punctures {p} and {q} coincide (distance {distance:e})")]
    CoincidentPunctures { p: usize, q: usize, distance: f64 },

    #[error("evaluation point {z} sits on puncture {p}")]
    PoleHit { p: usize, z: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("finite-difference step {delta:e} is not below half the minimum puncture distance {half_min:e}")]
    StepTooLarge { delta: f64, half_min: f64 },

    #[error("contour of radius {radius:e} around puncture {p} reaches puncture {other}")]
    ContourOverlap { p: usize, other: usize, radius: f64 },

    #[error("braid generator index {index} out of range 1..={max}")]
    GeneratorOutOfRange { index: usize, max: usize },

    #[error("tolerance {0:e} outside the supported range [1e-14, 1e-4]")]
    ToleranceOutOfRange(f64),

    #[error("step size underflow at t = {t:.6} (h = {h:e}); minimum strand distance reached {min_distance:e}")]
    StepUnderflow { t: f64, h: f64, min_distance: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t:.6}; tolerance not met")]
    ToleranceNotMet { t: f64, max_steps: usize },

    #[error("path is not continuous between segments {0} and {1}")]
    DiscontinuousPath(usize, usize),

    #[error("path passes within {min_distance:e} of a collision (limit {limit:e})")]
    NearCollision { min_distance: f64, limit: f64 },

    #[error("winding generator does not close: exp(2 pi Lambda) has eigenvalue {eigenvalue}")]
    NonClosingLoop { eigenvalue: String },

    #[error("matrix is not in su(N): {0}")]
    NotInAlgebra(String),

    #[error("grid of {got} points too small for bandwidth {bandwidth}; need at least {required}")]
    GridTooSmall { got: usize, bandwidth: usize, required: usize },

    #[error("grids differ: {0} vs {1} points")]
    GridMismatch(usize, usize),

    #[error("mode index {n} outside the tabulated range |n| <= {max}")]
    ModeOutOfRange { n: i64, max: i64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
