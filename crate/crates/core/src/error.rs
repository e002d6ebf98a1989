use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial spec: {0}")]
    InvalidSpec(String),
    #[error("polynomial is not monic (leading coefficient {0})")]
    NotMonic(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("root solver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    SolverFailure {
        iterations: usize,
        worst_residual: f64,
    },
    #[error("negative real eigenvalue {0} has no real logarithm")]
    Unrepresentable(f64),
    #[error("matrix exponential overflow (norm {0:e})")]
    ExpOverflow(f64),
    #[error("conjugation failed: residual {residual:e}, condition number {condition:e}")]
    ConjugationFailure { residual: f64, condition: f64 },
    #[error("plane is not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("degenerate lattice basis")]
    DegenerateBasis,
    #[error("grid of {0} points per axis is too coarse")]
    GridTooCoarse(usize),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("check failed in {stage}: {detail}")]
    CheckFailed { stage: &'static str, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}
