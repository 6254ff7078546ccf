use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cube side {l} is not divisible by block side {r}")]
    IndivisibleGeometry { l: usize, r: usize },

    #[error("dimension, side and block side must all be positive")]
    DegenerateGeometry,

    #[error("coordinate {value} of axis {axis} outside 1..={l}")]
    CoordinateOutOfRange { axis: usize, value: i64, l: usize },

    #[error("site index {index} outside 0..{sites}")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("block index {index} outside 0..{blocks}")]
    BlockOutOfRange { index: usize, blocks: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asym:e})")]
    NotSymmetric { max_asym: f64 },

    #[error("operation requires eigenvectors but the spectrum holds none")]
    MissingEigenvectors,

    #[error("geometry mismatch between operands")]
    GeometryMismatch,

    #[error("{what} must lie in {range}, got {value}")]
    OutOfDomain {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("intervals must be disjoint, sorted and ordered (lo <= hi)")]
    MalformedIntervals,

    #[error("no closed-form spectrum for simple boundary conditions")]
    NoAnalyticSpectrum,

    #[error("band-edge window E = {e} must lie in (0, {gamma}) for r = {r}")]
    WindowTooWide { e: f64, gamma: f64, r: usize },

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("too few trials: {got} < {need}")]
    TooFewTrials { got: usize, need: usize },

    #[error("no isolated eigenvalue cluster in the requested interval")]
    NoIsolatedCluster,

    #[error("subcube side {ell} incompatible with geometry (need r | ell and ell | L)")]
    BadSubcubeSide { ell: usize },

    #[error("configuration has {got} block values, geometry expects {expected}")]
    ConfigurationLength { got: usize, expected: usize },

    #[error("splitting hypotheses violated: {0}")]
    SplitRejected(String),

    #[error("cannot write output: {0}")]
    OutputWrite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
