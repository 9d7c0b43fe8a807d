use std::io::Write;
use std::path::Path;

use pkstiff::Error;

pub const MAP_SCHEMA: &str = "pkstiff.map/1";
pub const MAP_MATRICES_SCHEMA: &str = "pkstiff.map-matrices/1";
pub const COMPARE_SCHEMA: &str = "pkstiff.compare/1";
pub const COMPLIANCE_SCHEMA: &str = "pkstiff.compliance/1";

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_COMPUTATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Input(_) => EXIT_USAGE,
            Error::Data(_) | Error::Json(_) | Error::Io(_) | Error::Regime(_) => EXIT_DATA,
            Error::Structural(_)
            | Error::Numerical { .. }
            | Error::Singular(_)
            | Error::Workspace { .. } => EXIT_COMPUTATION,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_COMPUTATION, format!("i/o error: {e}"))
    }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            CliError::new(
                EXIT_COMPUTATION,
                format!("cannot write {}: {e}", p.display()),
            )
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn json_text(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}
