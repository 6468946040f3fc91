//! Report envelope, exit-code taxonomy and text rendering.

use std::fmt;

use matchcert::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Process exit codes. Stable for scripting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitCode {
    Ok = 0,
    /// Audit found a violation, or an internal invariant broke.
    Failure = 1,
    Parse = 2,
    InvalidMatching = 3,
    Ties = 4,
    NotStable = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::Parse,
            message: message.into(),
        }
    }

    pub fn matching(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::InvalidMatching,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidMarket(_) | Error::InvalidConfig(_) | Error::SizeLimit { .. } => ExitCode::Parse,
            Error::InvalidMatching(_) => ExitCode::InvalidMatching,
            Error::TiesPresent { .. } => ExitCode::Ties,
            Error::NotStable { .. } | Error::NotStableInput | Error::NotMember => ExitCode::NotStable,
            Error::StableSetTooLarge { .. } | Error::ImplicationViolation(_) => ExitCode::Failure,
        };
        let message = match &e {
            // The bare config message is what users grep for.
            Error::InvalidConfig(m) => m.clone(),
            Error::TiesPresent { .. } => format!("{e}; pass --tie-break lower-index to break ties"),
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// `sha256:` followed by the hex digest of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// What a subcommand hands back to `main`.
pub struct Outcome {
    pub input_digest: String,
    pub notes: Vec<String>,
    pub result: Value,
    pub text: String,
    /// Written to `--out` when given.
    pub artifact: Option<String>,
    pub exit: ExitCode,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub command: &'a [String],
    pub input_digest: Option<&'a str>,
    pub notes: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<&'a Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<&'a str>,
    pub exit_status: i32,
}

impl Report<'_> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}
