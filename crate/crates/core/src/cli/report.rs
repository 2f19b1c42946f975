//! Reproduction reports: one auditable row per checked quantity.

use std::fmt;

use serde::Serialize;

use crate::schedules::ConditionReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// The check could not be carried out (no oracle, finite data).
    #[serde(rename = "SKIP")]
    Skip,
    /// The quantity has no claim attached in this regime.
    #[serde(rename = "N/A")]
    NotApplicable,
    /// Reported for the record, no threshold.
    #[serde(rename = "INFO")]
    Info,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Skip => "SKIP",
            RowStatus::NotApplicable => "N/A",
            RowStatus::Info => "INFO",
        })
    }
}

/// Which limit behaviour the schedule's hypotheses promise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every run converges to the selected point `y*`.
    Selection,
    /// Every run converges to some minimizer, depending on the start.
    SomeMinimizer,
    /// No hypothesis set is decided.
    Undetermined,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Selection => "selection (limit is y*)",
            Regime::SomeMinimizer => "some minimizer (limit depends on start)",
            Regime::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check: String,
    /// Run index (1-based) for per-run rows.
    pub run: Option<usize>,
    pub value: Option<f64>,
    /// Textual value for non-numeric rows.
    pub note: String,
    pub threshold: Option<f64>,
    pub status: RowStatus,
}

impl ReportRow {
    pub fn info(check: impl Into<String>, note: impl Into<String>) -> Self {
        ReportRow {
            check: check.into(),
            run: None,
            value: None,
            note: note.into(),
            threshold: None,
            status: RowStatus::Info,
        }
    }

    pub fn status(check: impl Into<String>, status: RowStatus, note: impl Into<String>) -> Self {
        ReportRow {
            status,
            ..ReportRow::info(check, note)
        }
    }

    /// PASS iff `value <= threshold`.
    pub fn at_most(check: impl Into<String>, run: Option<usize>, value: f64, threshold: f64) -> Self {
        ReportRow {
            check: check.into(),
            run,
            value: Some(value),
            note: String::new(),
            threshold: Some(threshold),
            status: if value <= threshold { RowStatus::Pass } else { RowStatus::Fail },
        }
    }

    pub fn with_status(mut self, status: RowStatus) -> Self {
        self.status = status;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub start: Vec<f64>,
    pub final_x: Vec<f64>,
    pub iterations: u64,
    pub status: String,
    pub f_gap: Option<f64>,
    pub dist_to_target: Option<f64>,
    pub dist_to_set: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub regime: Regime,
    pub classification: ConditionReport,
    pub oracle: Option<crate::analysis::SolutionOracle>,
    pub runs: Vec<RunSummary>,
    pub spread: f64,
    pub rows: Vec<ReportRow>,
}

impl ReproductionReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Fail).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

impl fmt::Display for ReproductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime: {}", self.regime)?;
        if let Some(o) = &self.oracle {
            writeln!(f, "oracle: {} f* = {:e}, y* = {}", o.method, o.f_star, o.y_star)?;
        }
        writeln!(f)?;
        writeln!(f, "{:<28} {:>4} {:>11} {:>11} {:<5} note", "check", "run", "value", "threshold", "status")?;
        for r in &self.rows {
            let run = r.run.map_or_else(|| "-".to_string(), |i| i.to_string());
            writeln!(
                f,
                "{:<28} {:>4} {:>11} {:>11} {:<5} {}",
                r.check,
                run,
                cell(r.value),
                cell(r.threshold),
                r.status.to_string(),
                r.note
            )?;
        }
        write!(f, "\n{} row(s) failed", self.failures())
    }
}
