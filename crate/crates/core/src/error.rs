use thiserror::Error;

/// Errors raised across the wave builder, solver and diagnostics.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// State outside the admissible region of the flux model.
    #[error("inadmissible state: component {component} = {value} ({reason})")]
    Domain {
        component: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("strict hyperbolicity fails: eigenvalues {first} and {second} closer than {tolerance:e}")]
    Hyperbolicity {
        first: usize,
        second: usize,
        tolerance: f64,
    },

    #[error("complex eigenvalues of the flux Jacobian")]
    ComplexEigenvalues,

    #[error("usage: {0}")]
    Usage(String),

    /// The requested solution pattern (all shocks plus one contact) is not
    /// realised by the data.
    #[error("wave pattern violated in field {field}: {reason}")]
    Pattern { field: usize, reason: String },

    #[error("{stage} did not converge; residual history {history:?}")]
    Convergence { stage: String, history: Vec<f64> },

    #[error("no traveling-wave profile for field {field}: {reason}")]
    ProfileExistence { field: usize, reason: String },

    #[error("profile integration for field {field} left the tube around the chord at xi = {xi}")]
    Divergence { field: usize, xi: f64 },

    #[error("singular jump matrix (condition estimate {condition:e}); wave strengths must be positive")]
    Degeneracy { condition: f64 },

    #[error("contact curve construction failed: {0}")]
    Curve(String),

    #[error("weight construction failed for (i={i}, j={j}): {reason}")]
    Weight { i: usize, j: usize, reason: String },

    #[error("setup: {0}")]
    Setup(String),

    #[error("numerical blow-up at t = {time}")]
    BlowUp { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
