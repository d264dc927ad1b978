use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} lies outside [0, {horizon}]")]
    Domain { t: f64, horizon: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("invalid multimap: {0}")]
    InvalidMap(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential is not coercive")]
    NotCoercive,

    #[error("invalid boundary functional: {0}")]
    InvalidBoundary(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time grid has no node at t = {0}")]
    MissingNode(f64),

    /// The filtered selection set `F_V(t, x)` is empty: the guiding inequality
    /// fails at this point.
    #[error("guiding hypothesis violated at t = {t}, x = {x:?}")]
    GuidingViolation { t: f64, x: Vec<f64> },

    #[error("trajectory diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },

    #[error("field vanishes on the domain boundary (min |f| = {min_norm:e})")]
    DegenerateDomain { min_norm: f64 },

    #[error("degree inconclusive after {depth} refinements ({simplices} simplices)")]
    Inconclusive { depth: usize, simplices: usize },
}
