use kcc_core::dynamics::DynamicsError;
use kcc_core::lorenz::LorenzError;
use thiserror::Error;

/// Everything a command can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data: {0}")]
    Data(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameters: {0}")]
    Param(LorenzError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 I/O, 2 usage or configuration, 3 domain, 4 numerical.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } | Self::Data(_) => 1,
            Self::Usage(_) | Self::Param(_) => 2,
            Self::Domain(_) => 3,
            Self::Numerical(_) => 4,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<LorenzError> for CliError {
    fn from(e: LorenzError) -> Self {
        match e {
            LorenzError::ZeroSigma | LorenzError::NonFiniteParam { .. } => Self::Param(e),
            LorenzError::NoNontrivialEquilibria { .. } | LorenzError::NegativeRadicand(_) => {
                Self::Domain(e.to_string())
            }
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Lorenz(inner) => inner.into(),
            DynamicsError::Config(msg) => Self::Usage(msg),
            DynamicsError::Domain(msg) => Self::Domain(msg),
            other if other.is_numerical() => Self::Numerical(other.to_string()),
            other => Self::Domain(other.to_string()),
        }
    }
}
