use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("table is not square: {rows} rows, row {row} has {len} entries")]
    NonSquare { rows: usize, row: usize, len: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("epsilon {epsilon} is inadmissible for dimension {dim}: kernel entry ({k}, {l}) vanishes")]
    InadmissibleEpsilon { epsilon: f64, dim: usize, k: usize, l: usize },

    #[error("operation requires {required} kernel, got {found}")]
    WrongKernel { required: &'static str, found: String },

    #[error("operation requires {0} dimension")]
    WrongParity(&'static str),

    #[error("not a density operator: {0}")]
    InvalidDensity(String),

    #[error("Wigner value at ({m}, {n}) has imaginary residue {residue:e}")]
    ImaginaryResidue { m: usize, n: usize, residue: f64 },

    #[error("degenerate line L({n1}, {n2}, {n3}) in dimension {dim}")]
    DegenerateLine { n1: usize, n2: usize, n3: usize, dim: usize },

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
