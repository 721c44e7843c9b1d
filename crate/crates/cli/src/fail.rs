use std::fmt;

use dpmirror::Error;

/// Failure classes, one per exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Config,
    Budget,
    Dataset,
    Oracle,
    Io,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Io => 1,
            Kind::Config => 2,
            Kind::Budget => 3,
            Kind::Dataset => 4,
            Kind::Oracle => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn io(what: &str, e: std::io::Error) -> Self {
        Self::new(Kind::Io, format!("{what}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidParameter(_) | Error::Shape(_) => Kind::Config,
            Error::Budget(_) => Kind::Budget,
            Error::Dataset(_) => Kind::Dataset,
            Error::Oracle(_) | Error::Numeric(_) | Error::Diagnostic(_) => Kind::Oracle,
        };
        CliError::new(kind, e.to_string())
    }
}
