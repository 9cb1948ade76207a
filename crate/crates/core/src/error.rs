use thiserror::Error;

use crate::pointwise::CVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("cell {cell}: sector condition violated ({detail})")]
    SectorViolation { cell: usize, detail: String, witness: Option<CVector> },

    #[error("cell {cell}: domination bound violated ({detail})")]
    DominationViolation { cell: usize, detail: String },

    #[error("cell {cell}: not an orthogonal projection (hermitian {herm:.3e}, idempotent {idem:.3e})")]
    ProjectionInvalid { cell: usize, herm: f64, idem: f64 },

    #[error("cell {cell}: linear solve failed ({detail})")]
    SolveFailure { cell: usize, detail: String },

    #[error("cell {cell}: projection and Z do not commute (commutator {commutator:.3e})")]
    NotCommuting { cell: usize, commutator: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("singular Gram matrix: {0}")]
    SingularGram(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// Whether this error reports a failed model invariant rather than a parse or IO problem.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Parse(_) | Error::Io(_))
    }
}
