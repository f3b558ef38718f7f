use thiserror::Error;

/// Errors raised by the quantization library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric: max |a + a^T| = {asymmetry:e} against scale {scale:e}")]
    NonAntisymmetric { asymmetry: f64, scale: f64 },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("rank 2r = {} exceeds the dimension n = {n}", 2 * .r)]
    RankTooLarge { n: usize, r: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("covector is not on the model lattice: {0}")]
    OffLattice(String),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("supplied map violates the Weyl relation (defect {defect:e})")]
    NotAWeylSystem { defect: f64 },

    #[error("Weyl system at base point {point} does not match the bundle: {reason}")]
    SystemMismatch { point: usize, reason: String },

    #[error("unknown base point {0}")]
    UnknownPoint(usize),

    #[error("base mismatch: {0}")]
    BaseMismatch(String),

    #[error("section does not vanish at infinity: point {point} has L1-check norm {norm:e}")]
    NotVanishing { point: usize, norm: f64 },

    #[error("transformation does not preserve the Minkowski metric (defect {0:e})")]
    NotLorentz(f64),

    #[error("bivector is degenerate (rank {rank})")]
    Degenerate { rank: usize },

    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
