use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unknown wavelet family `{name}` (supported: {supported})")]
    UnknownWavelet { name: String, supported: String },

    #[error("input length {len} is not a power of two; the orthogonal transform requires a dyadic length 2^J")]
    NonDyadic { len: usize },

    #[error("invalid level count {levels}: must satisfy 1 <= L <= {max}")]
    InvalidLevels { levels: usize, max: usize },

    #[error("{levels} levels too deep for length {len} with a {taps}-tap filter (need taps * 2^(L-1) <= n)")]
    TooDeep { levels: usize, len: usize, taps: usize },

    #[error("empty input")]
    Empty,

    #[error("dense matrix size guard exceeded: n = {n} > {limit}")]
    SizeGuard { n: usize, limit: usize },

    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch { expected: String, found: String },

    #[error("inconsistent decomposition: {0}")]
    Inconsistent(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("non-square input: {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("degenerate scale: {0}")]
    Degenerate(String),

    #[error("tied values in {variable} at indices {first} and {second}")]
    Ties {
        variable: &'static str,
        first: usize,
        second: usize,
    },

    #[error("collinearity at stage {stage}: {detail}")]
    Collinear { stage: usize, detail: String },

    #[error("insufficient sample: n = {n}, need at least {required}")]
    InsufficientSample { n: usize, required: usize },

    #[error("degenerate interval: |r| = 1 has no finite Fisher transform")]
    DegenerateInterval,

    #[error("exact Kendall variance evaluated negative ({0:e})")]
    NegativeVariance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
