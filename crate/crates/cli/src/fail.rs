//! Exit-code classification.

use std::fmt;
use std::process::ExitCode;

use binormal::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input data: exit 2.
    Invalid(String),
    /// The computation failed or a check did not pass: exit 1.
    Numerical(String),
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn numerical(msg: impl Into<String>) -> CliError {
    CliError::Numerical(msg.into())
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidOrder(_)
            | Error::OddSpectral(_)
            | Error::GridMismatch
            | Error::NonFinite { .. }
            | Error::NonPositive { .. }
            | Error::InvalidParameter(_)
            | Error::NoTurningPoints { .. }
            | Error::ZeroAmplitude { .. }
            | Error::Csv(_) => CliError::Invalid(msg),
            Error::ProfileLeftDomain { .. }
            | Error::OdeBlowup { .. }
            | Error::PositivityViolation { .. }
            | Error::NonFiniteState { .. }
            | Error::ImaginaryResidue { .. }
            | Error::Constraint { .. }
            | Error::NotMonotone { .. }
            | Error::ExpOverflow { .. }
            | Error::FrameDegenerate { .. }
            | Error::CurvatureDegenerate { .. }
            | Error::Io(_)
            | Error::Json(_) => CliError::Numerical(msg),
        }
    }
}

/// Errors raised while reading user-supplied files are input errors.
pub fn input(e: Error) -> CliError {
    match e {
        Error::Io(io) => CliError::Invalid(io.to_string()),
        Error::Json(j) => CliError::Invalid(j.to_string()),
        other => other.into(),
    }
}
