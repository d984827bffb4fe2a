use thiserror::Error;

/// Failures of a command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("{context}: {source}")]
    Invalid {
        context: String,
        #[source]
        source: milnor::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: milnor::Error,
    },

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn invalid(context: impl Into<String>, source: milnor::Error) -> Self {
        CliError::Invalid {
            context: context.into(),
            source,
        }
    }

    /// Wraps an error raised while computing. Errors that reflect a property
    /// of the input (missing data, violated hypotheses) stay input errors.
    pub fn numerical(context: impl Into<String>, source: milnor::Error) -> Self {
        let context = context.into();
        if is_input_error(&source) {
            CliError::Invalid { context, source }
        } else {
            CliError::Numerical { context, source }
        }
    }

    /// 1 for numerical failures, 2 for input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } | CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

fn is_input_error(e: &milnor::Error) -> bool {
    use milnor::Error::*;
    matches!(
        e,
        InvalidDatum { .. }
            | SingularHolonomy(_)
            | ModelMismatch { .. }
            | NoChainModel
            | MissingSurgery(_)
            | SignConstraint(_)
            | SingularTransport(_)
            | HypothesisViolation { .. }
            | InvalidHurwitzParams(_)
            | HurwitzShift(_)
            | ZeroMode(_)
            | NonUnitary { .. }
            | NotHermitian { .. }
            | NotPositiveDefinite { .. }
            | FiltrationNotRespected(_)
            | NotAComplex { .. }
            | DimensionMismatch { .. }
            | NonSquare { .. }
            | NonFinite(_)
    )
}
