use std::fmt;
use std::path::Path;

pub const CONDITION_FAILED: u8 = 2;
pub const LEMMA_FAILED: u8 = 3;
pub const USAGE: u8 = 64;
pub const DEPTH_GUARD: u8 = 65;
pub const INTERNAL: u8 = 70;
pub const IO: u8 = 74;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(USAGE, message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(IO, format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<smoothk::Error> for CliError {
    fn from(e: smoothk::Error) -> Self {
        use smoothk::Error as E;
        let code = match &e {
            E::InvalidParameter { .. } | E::Parse { .. } | E::IndexOutOfRange { .. } | E::OutOfDomain { .. } => USAGE,
            E::DepthTooSmall { .. } | E::DepthExceedsCap { .. } | E::TruncationUnsafe { .. } => DEPTH_GUARD,
            E::NoValidIndex { .. } => CONDITION_FAILED,
            E::Degenerate(_) | E::Json(_) => INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}
