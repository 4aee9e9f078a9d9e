use crate::C64;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum LabError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("point {0} lies on the branch cut of the first sheet")]
    BranchCut(C64),

    #[error("unsupported continuation: {0}")]
    UnsupportedContinuation(String),

    /// Iteration budget exhausted. `trace` holds the iterates.
    #[error("no convergence after {iterations} iterations: {detail}")]
    Convergence {
        iterations: usize,
        detail: String,
        trace: Vec<C64>,
    },

    #[error("kernel constraint violated: {0}")]
    KernelConstraint(String),

    #[error("limit not reached at T = {tau}: gap {gap:e} between T and T/2")]
    LimitNotReached { tau: f64, gap: f64 },

    #[error("age undefined: the incoming component of the state vanishes")]
    UndefinedAge,

    #[error("operator is not decomposable: {0}")]
    NotDecomposable(String),
}

impl LabError {
    /// True for failures of iterative or limiting procedures.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            LabError::Convergence { .. } | LabError::LimitNotReached { .. }
        )
    }
}
