//! Library surface of the `vbqc` runner, exposed for the binary and its
//! integration tests.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

#[derive(Debug)]
pub enum CliErrorKind {
    Config,
    Invariant,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: CliErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: CliErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        CliError {
            kind: CliErrorKind::Invariant,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            CliErrorKind::Config => 2,
            CliErrorKind::Invariant => 1,
        }
    }
}
