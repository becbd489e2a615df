use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{Command, ExperimentConfig, MIN_TOLERANCE};
use crate::error::Result;

pub const SCHEMA: &str = "qhide-report/1";
/// The only field allowed to differ between two runs of the same config.
pub const TIMESTAMP_FIELD: &str = "timestamp";

/// `value ≤ limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            margin: limit - value,
            passed: value.is_finite() && limit.is_finite() && value <= limit,
        }
    }

    /// `value ≥ limit`.
    pub fn ge(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            margin: value - limit,
            passed: value.is_finite() && limit.is_finite() && value >= limit,
        }
    }

    /// A yes/no outcome, recorded as `0 ≤ 0` or `1 ≤ 0`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::le(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

/// A reported number with the estimator that produced it and the side it bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub value: f64,
    pub estimator: String,
    pub direction: String,
}

impl Entry {
    pub fn new(name: impl Into<String>, value: f64, estimator: &str, direction: &str) -> Self {
        Self {
            name: name.into(),
            value,
            estimator: estimator.into(),
            direction: direction.into(),
        }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, "exact", "exact")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: Command,
    pub config: BTreeMap<String, String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub entries: Vec<Entry>,
    pub details: serde_json::Value,
    pub timestamp: u64,
    /// Replaces the flat check/entry rows in CSV output.
    #[serde(skip)]
    pub csv_table: Option<String>,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig, mut checks: Vec<Check>, entries: Vec<Entry>, details: serde_json::Value) -> Self {
        if let Ok(tol) = config.tolerance() {
            if tol < MIN_TOLERANCE {
                checks.insert(0, Check::ge("tolerance-floor", tol, MIN_TOLERANCE));
            }
        }
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema: SCHEMA,
            command: config.command,
            config: config.settings.clone(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            entries,
            details,
            timestamp,
            csv_table: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Flat CSV: one row per check and per entry, unless the command supplied a table.
    pub fn to_csv(&self) -> Result<String> {
        if let Some(table) = &self.csv_table {
            return Ok(table.clone());
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["kind", "name", "value", "limit", "estimator", "direction", "passed"])?;
        for c in &self.checks {
            writer.write_record([
                "check",
                &c.name,
                &c.value.to_string(),
                &c.limit.to_string(),
                "",
                "",
                &c.passed.to_string(),
            ])?;
        }
        for e in &self.entries {
            writer.write_record(["entry", &e.name, &e.value.to_string(), "", &e.estimator, &e.direction, ""])?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| csv::Error::from(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

/// A serialized report with the timestamp blanked, for byte comparison.
pub fn without_timestamp(json: &str) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(json)?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert(TIMESTAMP_FIELD.into(), serde_json::Value::Null);
    }
    Ok(serde_json::to_string_pretty(&value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_tolerance_is_an_expected_failure() {
        let config = ExperimentConfig::resolve(Command::Pqc, None, &[("tol", "1e-14".into())]).unwrap();
        let report = RunReport::new(&config, vec![Check::le("x", 0.0, 1.0)], vec![], serde_json::Value::Null);
        assert!(!report.passed);
        assert_eq!(report.checks[0].name, "tolerance-floor");
    }

    #[test]
    fn timestamp_is_the_only_volatile_field() {
        let config = ExperimentConfig::resolve(Command::Pqc, None, &[]).unwrap();
        let a = RunReport::new(&config, vec![], vec![Entry::exact("v", 0.5)], serde_json::Value::Null);
        let mut b = a.clone();
        b.timestamp += 17;
        assert_ne!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(
            without_timestamp(&a.to_json().unwrap()).unwrap(),
            without_timestamp(&b.to_json().unwrap()).unwrap()
        );
        assert!(a.to_csv().unwrap().starts_with("kind,name,value"));
    }
}
