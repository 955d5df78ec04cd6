use std::fmt;

use dziobek_core::Error;

/// Why a command did not produce its document.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Exit 2.
    Invalid(String),
    /// Exit 3.
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use Error::*;
        match e {
            TooFewBodies { .. }
            | NonPositiveMass { .. }
            | ZeroMass { .. }
            | ZeroTotalMass
            | InvalidExponent(_)
            | CoincidentBodies { .. }
            | DimensionMismatch(_)
            | WrongDimension { .. }
            | UnsupportedCase(_)
            | InvalidOptions(_)
            | NonPositiveShape { .. } => Failure::Invalid(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}
