//! Command line front end for ergokit: workspace files in, verified JSON reports out.
#![allow(clippy::result_large_err)]

pub mod commands;
pub mod workspace;

use ergokit::Error;
use serde_json::{json, Map, Value};

pub use commands::{execute, Options};
pub use workspace::Workspace;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Module(#[from] Error),
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid map at {0}: {1}")]
    Validation(String, Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Module(e) => e.code(),
            CliError::UnknownName(_) => "UNKNOWN_NAME",
            CliError::Usage(_) => "USAGE",
            CliError::Io(..) => "IO_ERROR",
            CliError::Verification(_) => "VERIFICATION_FAILED",
            CliError::Validation(..) => "VALIDATION_ERROR",
        }
    }

    /// 2 for bad input, 3 for an exhausted budget, 4 for out-of-class or unsupported, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownName(_) | CliError::Usage(_) | CliError::Io(..) | CliError::Validation(..) => 2,
            CliError::Verification(_) => 1,
            CliError::Module(e) => match e {
                Error::Parse(_)
                | Error::FieldMismatch(..)
                | Error::DomainGap(_)
                | Error::DomainOverlap(_)
                | Error::ImageGap(_)
                | Error::ImageOverlap(_) => 2,
                Error::BudgetExhausted(_) | Error::ClassificationIncomplete => 3,
                Error::OutOfClass(_)
                | Error::CompositionOutOfClass(_)
                | Error::UnsupportedAperiodic
                | Error::IncommensurablePeriods => 4,
                _ => 1,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("code".into(), json!(self.code()));
        m.insert("message".into(), json!(self.to_string()));
        let inner = match self {
            CliError::Module(e) => Some(e),
            CliError::Validation(_, e) => {
                m.insert("cause".into(), json!(e.code()));
                Some(e)
            }
            _ => None,
        };
        if let Some(w) = inner.and_then(|e| e.witness()) {
            m.insert("witness".into(), json!([w.lo.to_string(), w.hi.to_string()]));
        }
        Value::Object(m)
    }
}

/// Re-checked identities attached to every report.
#[derive(Default)]
pub struct Checks {
    rows: Vec<Value>,
    failed: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, identity: &str, pass: bool) {
        self.rows.push(json!({ "identity": identity, "pass": pass }));
        if !pass {
            self.failed.push(identity.into());
        }
    }

    pub fn value(&mut self, identity: &str, pass: bool, value: impl ToString) {
        self.rows.push(json!({ "identity": identity, "pass": pass, "value": value.to_string() }));
        if !pass {
            self.failed.push(identity.into());
        }
    }

    pub fn finish(self) -> Result<Value, CliError> {
        if self.rows.is_empty() {
            return Err(CliError::Verification("no identity was checked".into()));
        }
        if !self.failed.is_empty() {
            return Err(CliError::Verification(self.failed.join("; ")));
        }
        Ok(json!({ "checks": self.rows, "verified": true }))
    }
}

/// Flatten a JSON value into `path<TAB>value` rows.
pub fn tsv_rows(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                tsv_rows(x, &p, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                tsv_rows(x, &format!("{path}.{i}"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path}\t{s}\n")),
        x => out.push_str(&format!("{path}\t{x}\n")),
    }
}
