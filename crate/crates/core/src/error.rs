use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    BadSubsystemIndex { index: usize, count: usize },

    #[error("invalid subsystem permutation {0:?}")]
    BadPermutation(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimension: {0}")]
    BadDimension(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("operator is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("Kraus operators are not trace preserving (completeness defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("the measure requires equal local dimensions, got d_A = {d_a}, d_B = {d_b}")]
    AsymmetricDimensions { d_a: usize, d_b: usize },

    #[error("matrix has a negative eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("integrator exceeded {max_steps} steps before reaching t = {t_target}")]
    StepLimitExceeded { max_steps: usize, t_target: f64 },

    #[error("trace drifted by {drift:.3e} at t = {t}")]
    TraceDrift { drift: f64, t: f64 },

    #[error("positivity lost at t = {t} (min eigenvalue {min_eigenvalue:.3e})")]
    PositivityLoss { min_eigenvalue: f64, t: f64 },

    #[error(
        "bracket [{t_lo}, {t_hi}] does not straddle target P_error {target} at T = {temperature}"
    )]
    BracketFailure {
        target: f64,
        temperature: f64,
        t_lo: f64,
        t_hi: f64,
    },

    #[error("P_error is not increasing in t below the target crossing at T = {temperature}")]
    NotMonotone { temperature: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error under any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the error came from time integration.
    pub fn is_integration_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::StepLimitExceeded { .. }
                | Error::TraceDrift { .. }
                | Error::PositivityLoss { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
