use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("tau = {tau} lies outside the profile domain [{lo}, {hi}]")]
    OutOfDomain { tau: f64, lo: f64, hi: f64 },

    #[error("positivity lost at node (i={i}, j={j}): {what} = {value:e}")]
    Positivity {
        i: usize,
        j: usize,
        what: &'static str,
        value: f64,
    },

    #[error("Newton did not converge at stage {stage} (s = {s}); residual history {history:?}")]
    NonConvergence {
        stage: usize,
        s: f64,
        history: Vec<f64>,
    },

    #[error("damped Newton step could not restore positivity at stage {stage} (s = {s})")]
    PositivityLoss { stage: usize, s: f64 },

    #[error("boundary data inconsistent: {0}")]
    BoundaryInconsistency(String),

    #[error("grids do not share a discretization: {0}")]
    Mismatch(String),

    #[error("decay fit rejected: {0}")]
    DegenerateFit(String),

    #[error("insufficient decay for a coordinate-invariant mass: fitted exponent {fitted} > {required}")]
    InsufficientDecay { fitted: f64, required: f64 },

    #[error("quadrature did not reach the requested accuracy (estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("singular linear system at pivot {0}")]
    Singular(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

impl Error {
    /// Input problems (bad configuration, malformed files) as opposed to
    /// numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::BoundaryInconsistency(_)
                | Error::Mismatch(_)
                | Error::OutOfDomain { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
