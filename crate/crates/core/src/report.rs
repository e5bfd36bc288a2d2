//! Machine-readable run reports.
//!
//! Field order is fixed by the struct declarations and maps are sorted, so a
//! deterministic run serializes to identical bytes except for `timestamp`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IoError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One verified property. A failing check always carries a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Library operation the check exercises.
    pub operation: String,
    /// Short statement of the property being verified.
    pub claim: String,
    pub status: CheckStatus,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub witness: Option<serde_json::Value>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: &str, operation: &str, claim: &str) -> Self {
        Self {
            name: name.into(),
            operation: operation.into(),
            claim: claim.into(),
            status: CheckStatus::Skipped,
            value: None,
            tolerance: None,
            witness: None,
            note: None,
        }
    }

    pub fn measured(mut self, value: f64, tolerance: f64) -> Self {
        self.value = Some(value);
        self.tolerance = Some(tolerance);
        self
    }

    /// Sets the status. A failure without an explicit witness records the value.
    pub fn verdict(mut self, pass: bool, witness: Option<serde_json::Value>) -> Self {
        self.status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        if !pass {
            self.witness = Some(witness.unwrap_or_else(|| serde_json::json!({ "value": self.value })));
        } else {
            self.witness = witness;
        }
        self
    }

    pub fn failed(mut self, reason: impl Into<String>) -> Self {
        let reason = reason.into();
        self.status = CheckStatus::Fail;
        self.witness = Some(serde_json::json!({ "error": reason }));
        self.note = Some(reason);
        self
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = CheckStatus::Skipped;
        self.note = Some(reason.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub crate_version: String,
    pub config_schema: u32,
    pub report_schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            config_schema: crate::config::SCHEMA_VERSION,
            report_schema: REPORT_SCHEMA_VERSION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Wall-clock data; the only part of a report allowed to vary between runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub name: String,
    /// SHA-256 of the config text, lowercase hex.
    pub config_hash: String,
    pub versions: Versions,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub timestamp: Timestamp,
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunReport {
    pub fn new(name: &str, config_text: &str, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.into(),
            config_hash: config_hash(config_text),
            versions: Versions::default(),
            seed,
            checks: Vec::new(),
            summary: Summary {
                passed: 0,
                failed: 0,
                skipped: 0,
            },
            timestamp: Timestamp {
                unix_seconds: 0,
                elapsed_seconds: 0.0,
            },
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.summarize();
    }

    fn summarize(&mut self) {
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        self.summary = Summary {
            passed: count(CheckStatus::Pass),
            failed: count(CheckStatus::Fail),
            skipped: count(CheckStatus::Skipped),
        };
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn stamp(&mut self, started: std::time::Instant) {
        let unix_seconds = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        self.timestamp = Timestamp {
            unix_seconds,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON with the timestamp removed, for byte comparison of runs.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("timestamp");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

pub fn emit_report(report: &RunReport, path: &Path) -> Result<(), IoError> {
    crate::io::write_text(path, &report.to_json())
}

pub fn read_report(path: &Path) -> Result<RunReport, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_json() {
        let r = RunReport::new("empty", "", 0);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(v["schema_version"], 1);
    }

    #[test]
    fn failing_check_has_witness() {
        let mut r = RunReport::new("x", "a", 1);
        r.push(Check::new("c", "op", "claim").measured(2.0, 1.0).verdict(false, None));
        assert!(!r.all_passed());
        assert!(r.checks[0].witness.is_some());
        let r2: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(r2, r);
    }

    #[test]
    fn timestamp_is_the_only_varying_key() {
        let mut a = RunReport::new("x", "cfg", 3);
        let mut b = a.clone();
        a.stamp(std::time::Instant::now());
        b.timestamp.unix_seconds = 12345;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_eq!(config_hash("abc").len(), 64);
        assert!(a.to_json().trim_end().ends_with('}'));
    }
}
