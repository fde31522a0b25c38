use std::fmt;
use std::path::Path;

use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(wgqed_core::Error),
    Io(String),
}

impl CliError {
    pub fn io(e: std::io::Error, path: &Path) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        use wgqed_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::InvalidParameter(_)) => 2,
            CliError::Core(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "usage",
            3 => "numerical",
            4 => "precondition",
            _ => "io",
        }
    }

    pub fn to_json(&self) -> String {
        let mut body = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Core(wgqed_core::Error::OffCondition {
            a_over_lambda,
            b_over_lambda,
            ..
        }) = self
        {
            body["nearest"] = json!({ "a_over_lambda": a_over_lambda, "b_over_lambda": b_over_lambda });
        }
        json!({ "error": body }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<wgqed_core::Error> for CliError {
    fn from(e: wgqed_core::Error) -> Self {
        CliError::Core(e)
    }
}
