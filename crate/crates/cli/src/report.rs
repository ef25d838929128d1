use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use phigamma::{Error, SCHEMA_VERSION, VERSION};

/// Exit-code contract shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    InputError,
    BudgetExceeded,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::InputError => 2,
            Status::BudgetExceeded => 3,
        }
    }

    pub fn from_check(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// A command failure together with the status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            status: Status::InputError,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Budget(_) | Error::DimensionTooLarge(_) | Error::DegreeCap(_) => {
                Status::BudgetExceeded
            }
            Error::Compatibility(_)
            | Error::NotUnit(_)
            | Error::Undecided(_)
            | Error::ValuationUndecided => Status::Fail,
            _ => Status::InputError,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(format!("malformed JSON: {e}"))
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub library_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            library_version: VERSION.to_string(),
            config_hash,
            seed,
            status: Status::Pass,
            exit_code: 0,
            summary: None,
            error: None,
            result: Value::Null,
        }
    }

    pub fn finish(mut self, outcome: Result<Outcome, Failure>) -> Self {
        match outcome {
            Ok(o) => {
                self.status = o.status;
                self.summary = Some(o.summary);
                self.result = o.result;
            }
            Err(f) => {
                self.status = f.status;
                self.error = Some(f.message);
            }
        }
        self.exit_code = self.status.code();
        self
    }
}

/// What a command produced when it ran to completion.
pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub result: Value,
}

/// SHA-256 of the canonical (sorted-key) JSON serialization of the inputs.
pub fn config_hash(inputs: &[Value]) -> String {
    let mut h = Sha256::new();
    for v in inputs {
        h.update(serde_json::to_vec(v).expect("JSON values serialize"));
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
