use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Every problem found in the configuration, one per entry.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Engine(#[from] cbfem::Error),

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot write JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Engine(cbfem::Error::Config(_)) => "config",
            CliError::Engine(_) => "solver",
            CliError::Csv(_) | CliError::Json(_) => "output",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            _ => 1,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let violations = match self {
            CliError::Config(v) => v.clone(),
            other => vec![other.to_string()],
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "violations": violations,
            }
        })
    }
}
