use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const GUARD: i32 = 2;
    pub const INVALID_MODEL: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("guard exceeded: {0}")]
    Guard(#[source] mpscmi::Error),
    #[error("invalid model: {0}")]
    Model(#[source] mpscmi::Error),
    #[error("numerical failure: {0}")]
    Numeric(#[source] mpscmi::Error),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("model file is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot write output: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Guard(_) => exit::GUARD,
            Self::Model(_) | Self::InvalidModel(_) | Self::Read { .. } | Self::Parse(_) => {
                exit::INVALID_MODEL
            }
            Self::Numeric(_) | Self::Write(_) => exit::NUMERIC,
        }
    }
}

impl From<mpscmi::Error> for CliError {
    fn from(e: mpscmi::Error) -> Self {
        use mpscmi::Error as E;
        match e {
            E::EnumerationTooLarge { .. }
            | E::SearchBudgetExceeded { .. }
            | E::EllOutOfRange { .. } => Self::Guard(e),
            E::NonSquare { .. }
            | E::NonFinite
            | E::ShapeMismatch { .. }
            | E::InvalidDistribution { .. }
            | E::DimensionTooSmall { .. }
            | E::NotNormalized { .. }
            | E::InvalidKraus { .. }
            | E::BoundaryNotNormalized { .. }
            | E::InvalidGeometry { .. }
            | E::SymbolOutOfRange { .. }
            | E::EvenDimension { .. } => Self::Model(e),
            _ => Self::Numeric(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Write(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
