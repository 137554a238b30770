use thiserror::Error;

/// Errors produced by the pricing engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid contract, market or numerical configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector or matrix sizes do not match.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A (near) zero pivot was met while factorizing a banded system.
    #[error("singular system at row {row}{}", location(*step, *iteration))]
    SingularSystem {
        row: usize,
        step: Option<usize>,
        iteration: Option<usize>,
    },

    /// The scalar Newton derivative vanished.
    #[error("vanishing Newton derivative{}", location(*step, *iteration))]
    SingularDerivative {
        step: Option<usize>,
        iteration: Option<usize>,
    },

    /// Newton iteration hit its cap without meeting the tolerance.
    #[error(
        "Newton did not converge after {iterations} iterations (residual {residual:e}, step {step_norm:e}){}",
        location(*step, None)
    )]
    NewtonNonConvergence {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
        step_norm: f64,
    },

    /// A NaN or infinite value appeared in the solution.
    #[error("non-finite value at time level {level}, node {node}")]
    NonFinite { level: usize, node: usize },
}

fn location(step: Option<usize>, iteration: Option<usize>) -> String {
    match (step, iteration) {
        (Some(s), Some(i)) => format!(" (time step {s}, Newton iteration {i})"),
        (Some(s), None) => format!(" (time step {s})"),
        (None, Some(i)) => format!(" (Newton iteration {i})"),
        (None, None) => String::new(),
    }
}

impl Error {
    /// Attaches a time-step index to solver errors that lack one.
    pub fn at_step(self, m: usize) -> Self {
        match self {
            Error::SingularSystem {
                row,
                step: None,
                iteration,
            } => Error::SingularSystem {
                row,
                step: Some(m),
                iteration,
            },
            Error::SingularDerivative {
                step: None,
                iteration,
            } => Error::SingularDerivative {
                step: Some(m),
                iteration,
            },
            Error::NewtonNonConvergence {
                step: None,
                iterations,
                residual,
                step_norm,
            } => Error::NewtonNonConvergence {
                step: Some(m),
                iterations,
                residual,
                step_norm,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
