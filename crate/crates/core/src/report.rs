//! Structured pass/fail reporting for the verification suites.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// One named check: a residual measured against a tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Aggregate of one verification suite.  The counts satisfy
/// passed + failed.len() == checks_run; failed rows repeat the offending
/// check with its residual and tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub checks_run: usize,
    pub passed: usize,
    pub failed: Vec<CheckResult>,
    pub wall_time_s: f64,
    pub checks: Vec<CheckResult>,
}

impl SuiteSummary {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            checks_run: 0,
            passed: 0,
            failed: Vec::new(),
            wall_time_s: 0.0,
            checks: Vec::new(),
        }
    }

    /// Records one check and returns whether it passed.
    pub fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let passed = residual.is_finite() && residual <= tolerance;
        let row = CheckResult { name: name.into(), residual, tolerance, passed };
        self.checks_run += 1;
        if passed {
            self.passed += 1;
        } else {
            self.failed.push(row.clone());
        }
        self.checks.push(row);
        passed
    }

    /// Records a check that could not be evaluated at all.
    pub fn push_error(&mut self, name: impl Into<String>, tolerance: f64) {
        let row =
            CheckResult { name: name.into(), residual: f64::NAN, tolerance, passed: false };
        self.checks_run += 1;
        self.failed.push(row.clone());
        self.checks.push(row);
    }

    pub fn all_passed(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Top-level report: field order is fixed by the struct, so two runs of
/// the same suites differ only in the timestamp and wall times.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub timestamp_unix_s: u64,
    pub generator: String,
    pub suites: Vec<SuiteSummary>,
}

impl Report {
    pub fn new(suites: Vec<SuiteSummary>) -> Self {
        Self {
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            generator: format!("sle-lab {}", env!("CARGO_PKG_VERSION")),
            suites,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.all_passed())
    }
}

/// Writes the report as pretty-printed JSON.
pub fn emit_report<W: Write>(report: &Report, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes simple CSV: a header row and one row per record.  Fields are
/// joined with commas; callers must not pass fields containing commas.
pub fn write_csv<W: Write>(
    mut out: W,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_stay_consistent() {
        let mut s = SuiteSummary::new("demo");
        assert!(s.push("ok", 1e-10, 1e-8));
        assert!(!s.push("bad", 1e-3, 1e-8));
        s.push_error("broken", 1e-8);
        assert_eq!(s.checks_run, 3);
        assert_eq!(s.passed, 1);
        let failed_names: Vec<&str> = s.failed.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(failed_names, ["bad", "broken"]);
        assert!((s.failed[0].residual - 1e-3).abs() < 1e-18);
        assert_eq!(s.failed[0].tolerance, 1e-8);
        assert_eq!(s.passed + s.failed.len(), s.checks_run);
        assert!(!s.all_passed());
    }

    #[test]
    fn json_shape_is_stable() {
        let mut s = SuiteSummary::new("demo");
        s.push("ok", 0.0, 1e-8);
        let mut buf = Vec::new();
        emit_report(&Report::new(vec![s]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let ti = text.find("\"timestamp_unix_s\"").unwrap();
        let gi = text.find("\"generator\"").unwrap();
        let si = text.find("\"suites\"").unwrap();
        assert!(ti < gi && gi < si);
        assert!(text.contains("\"suite\": \"demo\""));
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n");
    }
}
