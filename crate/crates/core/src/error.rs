use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("determinant vanishes identically")]
    ZeroDeterminant,

    #[error("ambiguous root cluster near {near}: separation {separation:e} is between clustering and isolation tolerances")]
    RootClusterAmbiguous { near: String, separation: f64 },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("matrix is not diagonalizable over the exact field: {0}")]
    NonDiagonalizable(String),

    #[error("root {0} is not a Gaussian rational; exact gauge algebra needs exact roots")]
    NonExactRoot(String),

    #[error("singularity on propagation path: {0}")]
    SingularityOnPath(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("fit residual {residual:e} exceeds tolerance {tolerance:e}")]
    FitResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero count mismatch: argument principle gives {expected}, located {found}")]
    ZeroCountMismatch { expected: i64, found: usize },

    #[error("multiple zero detected near {0}")]
    MultipleZeroDetected(String),

    #[error("singular gauge transformation: {0}")]
    SingularGauge(String),

    #[error("normalization lost: {0}")]
    NormalizationLost(String),

    #[error("matrix is not invertible off the origin: det = {0}")]
    NotUnitOffOrigin(String),

    #[error("norm reduction cannot progress: {0}")]
    ProgressImpossible(String),

    #[error("pipeline exceeded its step cap of {0}")]
    PipelineDiverged(usize),

    #[error("suite '{suite}' does not apply to {kind} systems")]
    SuiteInapplicable { suite: String, kind: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 input error, 3 precondition violation, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Parse(_) | InvalidInput(_) | SuiteInapplicable { .. } | Io(_) | Json(_) => 2,
            HypothesisViolated(_)
            | ZeroDeterminant
            | Resonance(_)
            | NonDiagonalizable(_)
            | NonExactRoot(_)
            | SingularityOnPath(_)
            | Domain(_)
            | MultipleZeroDetected(_)
            | SingularGauge(_)
            | NotUnitOffOrigin(_)
            | ProgressImpossible(_) => 3,
            RootClusterAmbiguous { .. }
            | PrecisionExhausted(_)
            | FitResidualTooLarge { .. }
            | ZeroCountMismatch { .. }
            | NormalizationLost(_)
            | PipelineDiverged(_) => 4,
        }
    }
}
