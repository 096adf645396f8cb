//! CSV tables, verdicts and the JSON summary written by every experiment.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))
    }
}

/// Shorthand for building table rows out of mixed values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::harness::output::cell(&$x)),*] };
}

/// Formats a value for CSV. Floats use the shortest round-trip form.
pub fn cell<T: Display + ?Sized>(x: &T) -> String {
    x.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: String,
    pub table: Table,
    /// Secondary tables, written as `<experiment>-<name>.csv`.
    pub extra: Vec<(String, Table)>,
    pub metrics: Map<String, Value>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl Outcome {
    pub fn new(experiment: &str, table: Table) -> Self {
        Self {
            experiment: experiment.to_string(),
            table,
            extra: Vec::new(),
            metrics: Map::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn metric<T: Serialize>(&mut self, key: &str, v: T) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn verdict(&mut self, key: &str, v: Verdict) {
        self.verdicts.insert(key.to_string(), v);
    }

    /// No verdict is `fail`.
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v != Verdict::Fail)
    }

    pub fn summary_json(&self, digest: &str) -> Value {
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config_digest": digest,
            "metrics": self.metrics,
            "verdicts": self.verdicts,
        })
    }

    /// Write the CSV files and the JSON summary into `dir`; returns the paths.
    pub fn write(&self, dir: &Path, digest: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let main = dir.join(format!("{}.csv", self.experiment));
        self.table.write_csv(&main)?;
        paths.push(main);
        for (name, t) in &self.extra {
            let p = dir.join(format!("{}-{name}.csv", self.experiment));
            t.write_csv(&p)?;
            paths.push(p);
        }
        let json = dir.join(format!("{}.json", self.experiment));
        let text = serde_json::to_string_pretty(&self.summary_json(digest))?;
        std::fs::write(&json, text + "\n")?;
        paths.push(json);
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_json_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["r", "value"]);
        t.push(row![6.0, 0.1]);
        t.push(row![10, "a,b"]);
        let mut o = Outcome::new("demo", t.clone());
        o.metric("median", 0.25);
        o.verdict("band", Verdict::Pass);
        o.verdict("trend", Verdict::Informational);
        let paths = o.write(dir.path(), "abc").unwrap();
        assert_eq!(Table::read_csv(&paths[0]).unwrap(), t);
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config_digest"], "abc");
        assert_eq!(v["verdicts"]["band"], "pass");
        assert_eq!(v["verdicts"]["trend"], "informational");
        assert!(o.passed());
        o.verdict("x", Verdict::Fail);
        assert!(!o.passed());
    }
}
