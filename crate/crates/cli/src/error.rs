use serde::Serialize;

use relaxwave_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;

/// Failure of one run, labelled with the stage that raised it.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub stage: String,
    pub kind: String,
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self {
            stage: "config".into(),
            kind: "usage".into(),
            message,
            exit_code: EXIT_USAGE,
        }
    }

    pub fn io(stage: &str, err: std::io::Error) -> Self {
        Self {
            stage: stage.into(),
            kind: "io".into(),
            message: err.to_string(),
            exit_code: EXIT_USAGE,
        }
    }

    pub fn core(stage: &str, err: Error) -> Self {
        let (kind, exit_code) = match &err {
            Error::Usage(_) => ("usage", EXIT_USAGE),
            Error::Setup(_) => ("setup", EXIT_USAGE),
            Error::Pattern { .. } => ("pattern", EXIT_USAGE),
            Error::Domain { .. } => ("domain", EXIT_USAGE),
            Error::Hyperbolicity { .. } => ("hyperbolicity", EXIT_USAGE),
            Error::ComplexEigenvalues => ("complex-eigenvalues", EXIT_USAGE),
            Error::Degeneracy { .. } => ("degeneracy", EXIT_USAGE),
            Error::BlowUp { .. } => ("blow-up", EXIT_BLOWUP),
            Error::Convergence { .. } => ("convergence", EXIT_ASSERTION),
            Error::ProfileExistence { .. } => ("profile-existence", EXIT_ASSERTION),
            Error::Divergence { .. } => ("divergence", EXIT_ASSERTION),
            Error::Curve(_) => ("curve", EXIT_ASSERTION),
            Error::Weight { .. } => ("weight", EXIT_ASSERTION),
        };
        Self {
            stage: stage.into(),
            kind: kind.into(),
            message: err.to_string(),
            exit_code,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "error": self })).expect("error serializes") + "\n"
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.stage, self.kind, self.message)
    }
}

impl std::error::Error for CliError {}
