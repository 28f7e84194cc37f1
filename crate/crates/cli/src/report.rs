//! Command reports: JSON for machines, a line per check for people.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use hmfree::report::{CheckReport, Failure};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Witness lists longer than this are cut; `failure_count` keeps the total.
pub const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: &'static str,
    pub checked: usize,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, report: CheckReport) -> Self {
        Check::with_verdict(name, report, None)
    }

    /// A check whose verdict may depend on more than its witness list.
    pub fn with_verdict(name: impl Into<String>, mut report: CheckReport, pass: Option<bool>) -> Self {
        let failure_count = report.failures.len();
        let pass = pass.unwrap_or(failure_count == 0);
        report.failures.truncate(MAX_WITNESSES);
        Check {
            name: name.into(),
            status: if pass { "pass" } else { "fail" },
            checked: report.checked,
            failure_count,
            failures: report.failures,
            details: Value::Null,
        }
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs_digest: String,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub failed_checks: usize,
    pub exit_status: i32,
}

impl Report {
    pub fn new(command: &str, input: &[u8], parameters: Value, checks: Vec<Check>) -> Self {
        let failed_checks = checks.iter().filter(|c| !c.passed()).count();
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            inputs_digest: digest(command, &parameters, input),
            parameters,
            checks,
            failed_checks,
            exit_status: if failed_checks == 0 { 0 } else { 1 },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("hmfree {} [{}]\n", self.command, &self.inputs_digest[..16]);
        for c in &self.checks {
            let mark = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{mark}  {} ({} checked)", c.name, c.checked);
            if let Some(value) = c.details.get("value") {
                let _ = writeln!(out, "      = {}", value.as_str().map_or_else(|| value.to_string(), str::to_string));
            }
            for f in &c.failures {
                let _ = writeln!(out, "      witness {}: {} != {}", f.witness, f.lhs, f.rhs);
            }
            if c.failure_count > c.failures.len() {
                let _ = writeln!(out, "      ... {} more", c.failure_count - c.failures.len());
            }
        }
        let _ = writeln!(out, "{} of {} checks failed", self.failed_checks, self.checks.len());
        out
    }
}

/// SHA-256 over the command name, its parameters and the raw input bytes.
pub fn digest(command: &str, parameters: &Value, input: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(parameters.to_string().as_bytes());
    h.update([0]);
    h.update(input);
    hex::encode(h.finalize())
}

/// A single failure as a report of one instance.
pub fn single(failure: Option<Failure>) -> CheckReport {
    CheckReport {
        checked: 1,
        failures: failure.into_iter().collect(),
    }
}
