use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to replay the
/// failing computation (witness points, positions, singular values).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically singular (smallest singular value {smallest_sv:.3e}, threshold {threshold:.3e})")]
    Singular { smallest_sv: f64, threshold: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("expression not evaluable at this point: inverse at `{path}` is singular (smallest singular value {smallest_sv:.3e})")]
    OutOfDomain { path: String, smallest_sv: f64 },

    #[error("syntax error at line {line}, column {col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("no common-domain sample found within budget")]
    Degenerate,

    #[error("expression is degenerate: {0}")]
    DegenerateExpression(String),

    #[error("expression contains a non-cancellable inverse; not a polynomial")]
    NotPolynomial,

    #[error("pencil coefficients are not contractive at this point (norm {0})")]
    NotContractive(f64),

    #[error("constant term is not the identity and cannot be normalized")]
    NotMonicAtZero,

    #[error("every sampled point was outside the domain")]
    AllSamplesOutOfDomain,

    #[error("pencil is singular at this point (smallest singular value {smallest_sv:.3e})")]
    OutOfPencilDomain { smallest_sv: f64 },

    #[error("similarity search exhausted its budget without a certificate")]
    NotFound,

    #[error("stability violation at a sampled point (smallest singular value {smallest_sv:.3e})")]
    StabilityViolation { smallest_sv: f64 },

    #[error("factorization identity violated (max residual {residual:.3e})")]
    IdentityViolation { residual: f64 },

    #[error("function is not accretive at a sampled point (min real eigenvalue {0:.3e})")]
    NotAccretive(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
