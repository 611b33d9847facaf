use serde::Serialize;

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    /// One cell per grid value; `None` is written as an empty cell.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "limit")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// A yes/no property; the value is 1 when it holds.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: Option<f64>, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::AtMost(limit), pass: value.is_some_and(|v| v <= limit) }
    }

    pub fn at_least(name: impl Into<String>, value: Option<f64>, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::AtLeast(limit), pass: value.is_some_and(|v| v >= limit) }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: Some(if ok { 1.0 } else { 0.0 }), bound: Bound::Holds, pass: ok }
    }

    pub fn describe(&self) -> String {
        let value = self.value.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let bound = match self.bound {
            Bound::AtMost(l) => format!(" (<= {l})"),
            Bound::AtLeast(l) => format!(" (>= {l})"),
            Bound::Holds => String::new(),
        };
        format!("{} = {value}{bound} {}", self.name, if self.pass { "pass" } else { "FAIL" })
    }
}

/// A table keyed by the swept parameter, plus metadata and bound checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureDataset {
    pub figure: String,
    pub title: String,
    pub key: String,
    pub grid: Vec<f64>,
    pub columns: Vec<Column>,
    /// `(name, value)` header lines describing the resolved configuration.
    pub meta: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl FigureDataset {
    pub fn new(figure: impl Into<String>, title: impl Into<String>, key: impl Into<String>, grid: Vec<f64>) -> Self {
        Self {
            figure: figure.into(),
            title: title.into(),
            key: key.into(),
            grid,
            columns: Vec::new(),
            meta: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        let name = name.into();
        if values.len() != self.grid.len() {
            return Err(ExperimentError::Sweep(format!(
                "column '{name}' has {} cells for a grid of {}",
                values.len(),
                self.grid.len()
            )));
        }
        self.columns.push(Column { name, values });
        Ok(())
    }

    pub fn push_meta(&mut self, name: impl Into<String>, value: impl ToString) {
        self.meta.push((name.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# figure: {}\n# title: {}\n", self.figure, self.title);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!("# check: {}\n", c.describe()));
        }
        out.push_str(&self.key);
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (row, x) in self.grid.iter().enumerate() {
            out.push_str(&fmt_key(*x));
            for c in &self.columns {
                out.push(',');
                if let Some(v) = c.values[row] {
                    out.push_str(&format!("{v:.6}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Pass/fail summary as pretty JSON.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            figure: &'a str,
            passed: bool,
            checks: &'a [Check],
        }
        let s = Summary { figure: &self.figure, passed: self.passed(), checks: &self.checks };
        serde_json::to_string_pretty(&s).expect("summary is plain data")
    }
}

fn fmt_key(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        let s = format!("{x:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
