use std::collections::BTreeMap;

use operadic::error::Error;
use operadic::io::{entries_of, Entry};
use operadic::linalg::GradedMap;
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Truncated,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub inputs: Vec<String>,
    pub arity_cap: Option<usize>,
    pub weight_cap: Option<u32>,
    pub degrees: Option<(i32, i32)>,
    pub order: Option<usize>,
    pub strict: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: ConfigEcho,
    pub warnings: Vec<String>,
    pub verdicts: Vec<Verdict>,
    /// Dimension tables, keyed by what they count.
    pub dimensions: BTreeMap<String, BTreeMap<String, usize>>,
    /// Qualitative findings that are neither passes nor failures.
    pub findings: BTreeMap<String, String>,
    pub representatives: BTreeMap<String, Vec<Entry>>,
    pub witnesses: BTreeMap<String, Vec<Entry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            command: command.into(),
            config,
            warnings: Vec::new(),
            verdicts: Vec::new(),
            dimensions: BTreeMap::new(),
            findings: BTreeMap::new(),
            representatives: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            timing_ms: None,
        }
    }

    pub fn push(&mut self, check: impl Into<String>, status: Status, detail: Option<String>) {
        self.verdicts.push(Verdict { check: check.into(), status, detail });
    }

    pub fn pass_if(&mut self, check: impl Into<String>, ok: bool) {
        self.push(check, if ok { Status::Pass } else { Status::Fail }, None);
    }

    /// Records a computed check. Truncation becomes a verdict; anything else
    /// is returned to abort the command.
    pub fn check(&mut self, check: impl Into<String>, r: Result<bool, Error>) -> Result<bool, Error> {
        match r {
            Ok(ok) => {
                self.pass_if(check, ok);
                Ok(ok)
            }
            Err(e @ Error::TruncationExceeded { .. }) => {
                self.push(check, Status::Truncated, Some(e.to_string()));
                Ok(false)
            }
            Err(Error::NoWitness(d)) => {
                self.push(check, Status::Fail, Some(d));
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }

    pub fn matrix(&mut self, name: impl Into<String>, m: &GradedMap) {
        self.representatives.insert(name.into(), entries_of(m));
    }

    pub fn witness(&mut self, name: impl Into<String>, m: &GradedMap) {
        self.witnesses.insert(name.into(), entries_of(m));
    }

    pub fn table<K: ToString>(&mut self, name: impl Into<String>, rows: impl IntoIterator<Item = (K, usize)>) {
        self.dimensions.insert(name.into(), rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
    }

    pub fn exit_code(&self) -> u8 {
        if self.verdicts.iter().any(|v| v.status == Status::Fail) {
            1
        } else if self.verdicts.iter().any(|v| v.status == Status::Truncated) {
            2
        } else {
            0
        }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for v in &self.verdicts {
            let tag = match v.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Truncated => "TRUNC",
            };
            out.push_str(&format!("{tag:5} {}", v.check));
            if let Some(d) = &v.detail {
                out.push_str(&format!(" ({d})"));
            }
            out.push('\n');
        }
        for (k, v) in &self.findings {
            out.push_str(&format!("      {k}: {v}\n"));
        }
        out
    }
}

pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Schema(_) | Error::Io(_) => 3,
        Error::TruncationExceeded { .. } => 2,
        _ => 1,
    }
}
