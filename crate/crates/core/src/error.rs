use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("lattice mismatch: {left} vs {right}")]
    LatticeMismatch { left: String, right: String },

    #[error("operator has empty support")]
    EmptySupport,

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("generators do not commute: {}", fmt_pairs(.pairs))]
    CommutationViolation { pairs: Vec<(usize, usize)> },

    #[error("generators {indices:?} wrap the whole lattice and have no local window")]
    OversizeGenerator { indices: Vec<usize> },

    #[error("lattice {rows}x{cols} is smaller than twice the generator window {k_rows}x{k_cols}")]
    LatticeTooSmall {
        rows: usize,
        cols: usize,
        k_rows: usize,
        k_cols: usize,
    },

    #[error("generator {index} is the identity")]
    IdentityGenerator { index: usize },

    #[error("generator {index} has a non-Hermitian phase")]
    NonHermitian { index: usize },

    #[error("code is frustrated: generators {indicator} multiply to -1")]
    Frustrated { indicator: String },

    #[error("code is not specified: {qubits} qubits but only {generators} generators")]
    NotSpecified { qubits: usize, generators: usize },

    #[error("generator set {indicator} does not multiply to +1")]
    NotIdentitySet { indicator: String },

    #[error("identity set is topologically non-trivial in the {direction} direction")]
    DirectionNotTrivial { direction: &'static str },

    #[error("membership solve failed: {0}")]
    MembershipFailed(String),

    #[error("operator anticommutes with generator {generator}; not a logical operator")]
    NotALogical { generator: usize },

    #[error("no dependence witness found: {0}")]
    WitnessNotFound(String),

    #[error("no local degeneracy breaker in window at ({row}, {col})")]
    NoLocalBreaker { row: usize, col: usize },

    #[error("string construction produced an operator anticommuting with generator {generator}")]
    ConstructionBug { generator: usize },

    #[error("certificate failed: {residual} degeneracies survive")]
    CertificateFailed { residual: usize },

    #[error("point operators cannot be truncated")]
    NotTruncatable,

    #[error("energy profile check failed: {0}")]
    PlateauViolation(String),

    #[error("3x3 pattern does not commute with its own translates")]
    NonCommutingPattern,

    #[error("no thermal decoder for this code: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(", ")
}
