use shapeflow::ShapeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Meshing, solver or I/O failure on valid input. Exit code 1.
    #[error("{0}")]
    Numerical(String),
    /// The shoot stopped early; partial output has been written. Exit code 3.
    #[error("geodesic breakdown at step {step} (t = {time}): {reason}")]
    Breakdown {
        step: usize,
        time: f64,
        reason: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Breakdown { .. } => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Errors while reading user input are format errors whatever their kind.
    pub fn input(e: ShapeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::InvalidArgument(_) | ShapeError::IncompatibleData(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
