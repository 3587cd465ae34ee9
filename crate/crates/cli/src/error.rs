use std::fmt;
use std::path::Path;
use std::process::ExitCode;

/// A failed command, classified by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: a usage error, an invalid value or a rejected document.
    Invalid(String),
    /// A file or network operation failed.
    Io(String),
}

impl Failure {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Invalid(_) => ExitCode::from(1),
            Failure::Io(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<dronecine_core::Error> for Failure {
    fn from(e: dronecine_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<dronecine_service::ApiError> for Failure {
    fn from(e: dronecine_service::ApiError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<dronecine_client::ClientError> for Failure {
    fn from(e: dronecine_client::ClientError) -> Self {
        match e {
            dronecine_client::ClientError::Api { .. } => Failure::Invalid(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
