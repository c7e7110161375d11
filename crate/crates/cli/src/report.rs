use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub label: String,
    /// Lossless rational or symbolic text.
    pub exact: Option<String>,
    pub numeric: Option<f64>,
    pub verified: bool,
}

impl Row {
    pub fn new(label: impl Into<String>) -> Self {
        Row {
            label: label.into(),
            exact: None,
            numeric: None,
            verified: true,
        }
    }

    pub fn exact(mut self, text: impl ToString) -> Self {
        self.exact = Some(text.to_string());
        self
    }

    pub fn numeric(mut self, x: Option<f64>) -> Self {
        self.numeric = x;
        self
    }

    pub fn verified(mut self, ok: bool) -> Self {
        self.verified = ok;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub mode: String,
    pub rows: Vec<Row>,
    pub verdicts: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, mode: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            mode: mode.into(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn all_verified(&self) -> bool {
        self.rows.iter().all(|r| r.verified)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.exact.clone().unwrap_or_else(|| "-".into()),
                    r.numeric.map_or_else(|| "-".into(), |x| format!("{x:.12e}")),
                    if r.verified { "ok" } else { "FAIL" }.into(),
                ]
            })
            .collect();
        let header = ["label", "exact", "numeric", "verified"];
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        writeln!(out, "{} [{}]", self.command, self.mode).unwrap();
        let line = |out: &mut String, row: &[String]| {
            let padded: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(out, "  {}", padded.join("  ").trim_end()).unwrap();
        };
        line(&mut out, &header.map(String::from));
        for row in &cells {
            line(&mut out, row);
        }
        for v in &self.verdicts {
            writeln!(out, "verdict: {v}").unwrap();
        }
        for w in &self.warnings {
            writeln!(out, "warning: {w}").unwrap();
        }
        out
    }
}
