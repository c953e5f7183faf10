use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Structured failure modes. Diagnostics are carried as `f64` regardless of
/// the scalar the computation ran with, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("defective matrix: min |t_norm| = {min_t_norm:.3e} below {threshold:.3e}; at or too near an exceptional point")]
    DefectiveMatrix { min_t_norm: f64, threshold: f64 },

    #[error("singular configuration: e1 = e2 makes the coupling formulas divide by zero")]
    SingularConfiguration,

    #[error("invalid params: {0}")]
    InvalidParams(String),

    #[error("inconsistent branch: no square-root sign combination reaches residual {best:.3e} < {required:.3e}")]
    InconsistentBranch { best: f64, required: f64 },

    #[error("step-size error: eigenvalue matching ambiguous at step {step} (best {best:.3e}, runner-up {second:.3e}); refine the path")]
    StepSize { step: usize, best: f64, second: f64 },

    #[error("on-singularity error: eigenvalues collide at λ = {lambda_re}+{lambda_im}i")]
    OnSingularity { lambda_re: f64, lambda_im: f64 },

    #[error("gauge error: component used for gauge fixing has magnitude {magnitude:.3e}")]
    Gauge { magnitude: f64 },

    #[error("branch-tracking error: square-root continuity broke (overlap {overlap:.3e})")]
    BranchTracking { overlap: f64 },

    #[error("non-generic tie: two eigenvalue real parts coincide within tolerance")]
    NonGenericTie,

    #[error("indeterminate pattern: Im(E2) is not strictly extremal (margin {margin:.3e})")]
    IndeterminatePattern { margin: f64 },

    #[error("inconsistency error: measured phase offsets deviate from the width-predicted assignment by {max_deviation_deg:.2}°")]
    InconsistentPhases { max_deviation_deg: f64 },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("divergence error: no convergence after {iterations} iterations (last residual {last_residual:.3e})")]
    Divergence {
        iterations: usize,
        last_residual: f64,
    },

    #[error(
        "degenerate structure: triple eigenvalue without the rank-2 Jordan block (rank {rank})"
    )]
    DegenerateStructure { rank: usize },

    #[error("structural infeasibility: {unknowns} real unknowns cannot satisfy {conditions} real conditions")]
    StructuralInfeasibility { unknowns: usize, conditions: usize },
}

impl Error {
    /// Stable machine-readable name, used by the CLI for exit diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::DefectiveMatrix { .. } => "defective-matrix",
            Error::SingularConfiguration => "singular-configuration",
            Error::InvalidParams(_) => "invalid-params",
            Error::InconsistentBranch { .. } => "inconsistent-branch",
            Error::StepSize { .. } => "step-size",
            Error::OnSingularity { .. } => "on-singularity",
            Error::Gauge { .. } => "gauge",
            Error::BranchTracking { .. } => "branch-tracking",
            Error::NonGenericTie => "non-generic-tie",
            Error::IndeterminatePattern { .. } => "indeterminate-pattern",
            Error::InconsistentPhases { .. } => "inconsistency",
            Error::InvalidSample(_) => "invalid-sample",
            Error::Divergence { .. } => "divergence",
            Error::DegenerateStructure { .. } => "degenerate-structure",
            Error::StructuralInfeasibility { .. } => "structural-infeasibility",
        }
    }
}
