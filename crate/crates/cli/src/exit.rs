//! Process exit codes and the error type that carries them.

use slowmix::Error;

pub const OK: u8 = 0;
pub const USAGE: u8 = 1;
pub const CONSTRUCTION: u8 = 2;
pub const VERIFICATION: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Precondition(_) | Error::CorruptedCeiling(_) => USAGE,
            Error::Capacity(_)
            | Error::Domain(_)
            | Error::Resolution(_)
            | Error::SmallDivisor(_)
            | Error::Assembly { .. }
            | Error::Stiffness(_) => CONSTRUCTION,
        };
        Self { code, message: e.to_string() }
    }
}
