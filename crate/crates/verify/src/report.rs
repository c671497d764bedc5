//! Reports. Maps are BTreeMaps and degrees are exact rationals rendered as
//! strings, so equal runs give byte-identical JSON.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use tmotive::{MathError, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The scenario was not admitted (a logarithm does not converge).
    Rejected,
    Error,
}

impl Status {
    pub fn ok(self) -> bool {
        matches!(self, Status::Pass | Status::Rejected)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Rejected => "REJECTED",
            Status::Error => "ERROR",
        }
    }
}

/// One identity. `value` is a defect degree ("-inf" for an exact zero), or a
/// short verdict for symbolic checks; a degree passes when it is strictly
/// below `bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    pub pass: bool,
}

pub fn fmt_deg(d: Option<Rat>) -> String {
    d.map_or_else(|| "-inf".to_string(), |x| x.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, Check>,
    /// Recovered a_j in F_q[t].
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub a: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pinned: BTreeMap<String, String>,
}

impl Default for TaskReport {
    fn default() -> Self {
        TaskReport {
            status: Status::Pass,
            reason: None,
            checks: BTreeMap::new(),
            a: BTreeMap::new(),
            pinned: BTreeMap::new(),
        }
    }
}

impl TaskReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_error(e: &MathError) -> Self {
        let mut r = Self::new();
        match e {
            MathError::OutsideLogRadius(_) => {
                r.status = Status::Rejected;
                r.reason = Some(format!("rejected (admission): {e}"));
            }
            _ => {
                r.status = Status::Error;
                r.reason = Some(e.to_string());
            }
        }
        r
    }

    /// Passes when `d < bound` (None is an exact zero).
    pub fn degree(&mut self, name: impl Into<String>, d: Option<Rat>, bound: Rat) -> bool {
        let pass = d.map_or(true, |x| x < bound);
        self.checks.insert(name.into(), Check { value: fmt_deg(d), bound: Some(bound.to_string()), pass });
        pass
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, value: impl Into<String>) -> bool {
        self.checks.insert(name.into(), Check { value: value.into(), bound: None, pass });
        pass
    }

    pub fn exact(&mut self, name: impl Into<String>, zero: bool) -> bool {
        self.verdict(name, zero, if zero { "0" } else { "nonzero" })
    }

    pub fn pin(&mut self, name: impl Into<String>, value: impl ToString) {
        self.pinned.insert(name.into(), value.to_string());
    }

    /// Set the status from the checks unless an error already decided it.
    pub fn finish(mut self) -> Self {
        if self.status == Status::Pass && self.checks.values().any(|c| !c.pass) {
            self.status = Status::Fail;
        }
        self
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub omega_convention: String,
    pub tasks: BTreeMap<String, TaskReport>,
    /// Milliseconds per task; empty unless requested, which keeps the JSON
    /// deterministic by default.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timings_ms: BTreeMap<String, u64>,
}

impl ScenarioReport {
    pub fn ok(&self) -> bool {
        self.tasks.values().all(|t| t.status.ok())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub reports: Vec<ScenarioReport>,
}

impl BatchReport {
    pub fn ok(&self) -> bool {
        self.reports.iter().all(|r| r.ok())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<BatchReport, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// One line per task.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for rep in &self.reports {
            for (name, t) in &rep.tasks {
                write!(out, "{} {}: {}", rep.name, name, t.status.label()).unwrap();
                if let Some(r) = &t.reason {
                    write!(out, " ({r})").unwrap();
                }
                let failed = t.failed_checks();
                if !failed.is_empty() {
                    write!(out, " failed: {}", failed.join(", ")).unwrap();
                }
                write!(out, " [{} checks]", t.checks.len()).unwrap();
                if !t.a.is_empty() {
                    let a: Vec<String> = t.a.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    write!(out, " {}", a.join("; ")).unwrap();
                }
                if let Some(ms) = rep.timings_ms.get(name) {
                    write!(out, " {ms} ms").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }
}
