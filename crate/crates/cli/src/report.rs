//! Check records: one JSON object per line, plus a plain-text summary.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// How a row takes part in the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this curve; never gated.
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub curve: String,
    pub stage: &'static str,
    pub check: String,
    pub status: Status,
    /// Measured quantity compared against `gate`.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub gate: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

#[derive(Debug, Default)]
pub struct Report {
    curve: String,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(curve: &str) -> Self {
        Report {
            curve: curve.to_string(),
            records: vec![],
        }
    }

    /// Gated row: passes when `pass(value)`.
    pub fn gated(
        &mut self,
        stage: &'static str,
        check: impl Into<String>,
        value: f64,
        gate: &str,
        pass: bool,
        detail: impl Serialize,
    ) {
        let status = if pass { Status::Pass } else { Status::Fail };
        self.push(stage, check, status, Some(value), None, gate, detail);
    }

    /// Informational row, always passes; `text` goes in the value column.
    pub fn info(
        &mut self,
        stage: &'static str,
        check: impl Into<String>,
        text: impl Into<String>,
        detail: impl Serialize,
    ) {
        self.push(stage, check, Status::Pass, None, Some(text.into()), "", detail);
    }

    pub fn skip(&mut self, stage: &'static str, check: impl Into<String>, reason: impl std::fmt::Display) {
        let reason = reason.to_string();
        self.push(stage, check, Status::Skip, None, Some(reason), "", Value::Null);
    }

    pub fn error(&mut self, stage: &'static str, check: impl Into<String>, err: impl std::fmt::Display) {
        let err = err.to_string();
        self.push(stage, check, Status::Fail, None, Some(err), "", Value::Null);
    }

    fn push(
        &mut self,
        stage: &'static str,
        check: impl Into<String>,
        status: Status,
        value: Option<f64>,
        text: Option<String>,
        gate: &str,
        detail: impl Serialize,
    ) {
        self.records.push(Record {
            curve: self.curve.clone(),
            stage,
            check: check.into(),
            status,
            value,
            text,
            gate: gate.to_string(),
            detail: serde_json::to_value(detail).unwrap_or(Value::Null),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .records
            .iter()
            .map(|r| {
                [
                    r.stage.to_string(),
                    r.check.clone(),
                    r.value
                        .map(|v| format!("{v:.3e}"))
                        .or_else(|| r.text.clone())
                        .unwrap_or_default(),
                    r.gate.clone(),
                    match r.status {
                        Status::Pass => "ok",
                        Status::Fail => "FAIL",
                        Status::Skip => "n/a",
                    }
                    .to_string(),
                ]
            })
            .collect();
        let header = ["stage", "check", "value", "gate", "status"].map(String::from);
        let mut widths = header.clone().map(|h| h.len());
        for row in &rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = format!("curve {}\n", self.curve);
        for row in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        let failed = self.records.iter().filter(|r| r.status == Status::Fail).count();
        let _ = writeln!(out, "{} checks, {} failed", self.records.len(), failed);
        out
    }
}
