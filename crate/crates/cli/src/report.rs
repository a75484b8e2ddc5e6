//! The JSON run report and the exit-code contract.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_STALLED: i32 = 2;
pub const EXIT_SUBPROBLEM: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input.
    Input(String),
    Core(subreg_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(subreg_core::Error::CapExceeded { .. }) => EXIT_CAP,
            _ => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<subreg_core::Error> for CliError {
    fn from(e: subreg_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Input(msg)
    }
}

impl From<&str> for CliError {
    fn from(msg: &str) -> Self {
        CliError::Input(msg.to_string())
    }
}

/// What a command produced, before the report is assembled.
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Vec<String>,
    pub exit_code: i32,
    /// Sidecar CSV path and contents.
    pub csv: Option<(String, String)>,
}

impl Outcome {
    pub fn ok(results: Value) -> Self {
        Self {
            results,
            diagnostics: Vec::new(),
            exit_code: EXIT_OK,
            csv: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(rename = "inputs-digest")]
    pub inputs_digest: String,
    pub options: BTreeMap<String, String>,
    pub results: Value,
    pub diagnostics: Vec<String>,
    /// Present only with `--timings`, so that default reports are reproducible byte for byte.
    pub timings: Option<Timings>,
    pub csv: Option<String>,
}

/// SHA-256 over the command name, the problem file bytes and the canonical options.
pub fn inputs_digest(command: &str, file: Option<&[u8]>, options: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0u8]);
    if let Some(bytes) = file {
        h.update(bytes);
    }
    h.update([0u8]);
    for (k, v) in options {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_every_input() {
        let mut opts = BTreeMap::new();
        opts.insert("seed".to_string(), "1".to_string());
        let a = inputs_digest("solve", Some(b"{}"), &opts);
        assert_eq!(a.len(), 64);
        assert_eq!(a, inputs_digest("solve", Some(b"{}"), &opts));
        assert_ne!(a, inputs_digest("kkt", Some(b"{}"), &opts));
        assert_ne!(a, inputs_digest("solve", Some(b"{ }"), &opts));
        opts.insert("seed".to_string(), "2".to_string());
        assert_ne!(a, inputs_digest("solve", Some(b"{}"), &opts));
    }

    #[test]
    fn cap_errors_map_to_exit_four() {
        let e = CliError::Core(subreg_core::Error::CapExceeded {
            what: "x",
            limit: 1,
            actual: 2,
        });
        assert_eq!(e.exit_code(), EXIT_CAP);
        assert_eq!(CliError::from("bad").exit_code(), EXIT_INPUT);
        assert_eq!(CliError::Core(subreg_core::Error::Singular).exit_code(), EXIT_INPUT);
    }
}
