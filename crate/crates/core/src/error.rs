use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}; expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitRegister(usize),

    #[error("operator is not Hermitian: max |H - H^dagger| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("inverse temperature must be non-negative, got {0}")]
    NegativeBeta(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("empty Pauli string")]
    EmptyPauliString,

    #[error("invalid Pauli letter {letter:?} at position {position}")]
    InvalidPauliLetter { letter: char, position: usize },

    #[error("stabilizers {0} and {1} do not commute")]
    NonCommutingStabilizers(usize, usize),

    #[error("stabilizer {0} does not square to the identity")]
    NotAnInvolution(usize),

    #[error("ground manifold is {found}-fold degenerate, expected {expected}")]
    GroundDegeneracy { found: usize, expected: &'static str },

    #[error("spectral gap {gap:.3e} is below the resolvable threshold {threshold:.3e}")]
    UnresolvedGap { gap: f64, threshold: f64 },

    #[error("Heisenberg chain needs an even number of sites >= 2, got {0}")]
    InvalidChainLength(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hermitian eigensolver did not converge")]
    EigenSolver,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
