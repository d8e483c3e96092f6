use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a modular group element: ad - bc = {0}")]
    NotUnimodular(String),

    #[error("representation violates the group relations: residual {residual:e} > tolerance {tol:e}")]
    RelationViolation { residual: f64, tol: f64 },

    #[error("rho(S^2) is not an involution: residual {0:e}")]
    NonInvolutive(f64),

    #[error("folded summation requires rho(S^2) = +-I (residual {0:e})")]
    NotScalarS2(f64),

    #[error("truncation underflow: {0}")]
    TruncationUnderflow(String),

    #[error("q-exponent offsets differ ({0} vs {1}); series live in different graded pieces")]
    MuMismatch(String, String),

    #[error("block mismatch: {0}")]
    BlockMismatch(String),

    #[error("ill-conditioned fit: condition {cond:e} exceeds {threshold:e}")]
    IllConditionedFit { cond: f64, threshold: f64 },

    #[error("rank deficient: numeric rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("no differential equation of order {order} with leading weight {lead_weight}")]
    NoSolution { order: usize, lead_weight: u32 },

    #[error("kernel of dimension {dim} (expected 1) at order {order}, leading weight {lead_weight}")]
    AmbiguousKernel {
        order: usize,
        lead_weight: u32,
        dim: usize,
        /// Kernel basis, one vector per row, over the unknown monomial coefficients.
        kernel: Vec<Vec<num_complex::Complex64>>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch at weight {weight}: expected {expected}, found {found}")]
    Mismatch {
        weight: i64,
        expected: usize,
        found: usize,
    },

    #[error("refusing to Jordanize: {0}")]
    NearlyDefective(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
