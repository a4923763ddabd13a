//! Machine-readable run reports: a named list of checks with measured
//! values, tolerances and pass flags, serialised as stable JSON.
//!
//! The JSON layout is versioned via `schema_version`; downstream tooling
//! keys off that field. Reports carry no timestamps so a rerun with the
//! same configuration and seed is byte-identical.

use serde::Serialize;

/// One measured assertion.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// Comparison applied: "<=" (value within tolerance), ">" (value must
    /// exceed tolerance), or "~" (|value − tolerance| small, in `value`).
    pub op: String,
    pub pass: bool,
}

impl Check {
    /// `value <= tolerance`.
    pub fn le(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            op: "<=".into(),
            pass: value <= tolerance,
        }
    }

    /// `value > threshold`.
    pub fn gt(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: threshold,
            op: ">".into(),
            pass: value > threshold,
        }
    }

    /// `|value − target| <= band`, reported as the deviation.
    pub fn near(name: &str, value: f64, target: f64, band: f64) -> Self {
        let dev = (value - target).abs();
        Check {
            name: name.into(),
            value,
            tolerance: band,
            op: format!("~{target}"),
            pass: dev <= band,
        }
    }
}

/// Versioned report for one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    pub command: String,
    pub target: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    /// Informational outputs (minimiser probes, scan results, angles).
    pub values: serde_json::Value,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: &str, target: &str, params: serde_json::Value) -> Self {
        RunReport {
            schema_version: "1".into(),
            command: command.into(),
            target: target.into(),
            params,
            checks: Vec::new(),
            values: serde_json::Value::Object(Default::default()),
            pass: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn set_value(&mut self, key: &str, value: serde_json::Value) {
        if let serde_json::Value::Object(map) = &mut self.values {
            map.insert(key.to_string(), value);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// One line per check, for terminal output.
    pub fn print_lines(&self) {
        for c in &self.checks {
            let flag = if c.pass { "PASS" } else { "FAIL" };
            println!(
                "[{flag}] {}: value {:.6e} ({} {:.3e})",
                c.name, c.value, c.op, c.tolerance
            );
        }
        println!(
            "{}: {}",
            self.target,
            if self.pass { "PASS" } else { "FAIL" }
        );
    }
}
