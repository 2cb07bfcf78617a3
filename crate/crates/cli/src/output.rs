//! Sweep results, CSV rendering and the JSON summary.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::SweepConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    Unstable,
    Unphysical,
    Timeout,
    /// Any other numerical or parameter error at this point.
    Failed,
}

impl Status {
    pub const ALL: [Status; 5] = [Status::Ok, Status::Unstable, Status::Unphysical, Status::Timeout, Status::Failed];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unstable => "unstable",
            Status::Unphysical => "unphysical",
            Status::Timeout => "timeout",
            Status::Failed => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    /// Unit or log base, empty for pure numbers.
    pub unit: &'static str,
    pub axis: bool,
}

impl Column {
    pub fn axis(name: &str, unit: &'static str) -> Self {
        Self { name: name.to_string(), unit, axis: true }
    }

    pub fn value(name: impl Into<String>, unit: &'static str) -> Self {
        Self { name: name.into(), unit, axis: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// One entry per column, axis columns first.
    pub values: Vec<f64>,
    pub status: Status,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

/// Shortest representation that parses back to the same value.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn status_counts(&self) -> Vec<(Status, usize)> {
        Status::ALL.iter().map(|s| (*s, self.rows.iter().filter(|r| r.status == *s).count())).collect()
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Ok)
    }

    fn provenance(&self) -> String {
        let mut s = format!("# nesslab {VERSION}\n# experiment: {}\n# config:\n", self.config.experiment);
        for line in self.config.canonical().to_toml().lines().filter(|l| !l.trim().is_empty()) {
            s.push_str("#   ");
            s.push_str(line);
            s.push('\n');
        }
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|c| if c.unit.is_empty() { c.name.clone() } else { format!("{} [{}]", c.name, c.unit) })
            .collect();
        s.push_str(&format!("# columns: {}, status\n", units.join(", ")));
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        header.push("status");
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec: Vec<String> = r.values.iter().map(|x| format_float(*x)).collect();
            rec.push(r.status.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        self.provenance() + &body
    }

    fn coordinates(&self, row: &Row) -> Value {
        let mut m = Map::new();
        for (c, x) in self.columns.iter().zip(&row.values) {
            if c.axis {
                m.insert(c.name.clone(), json!(x));
            }
        }
        Value::Object(m)
    }

    /// Status counts, per-column extrema over ok rows with their grid
    /// coordinates, and the messages of failed points.
    pub fn summary(&self) -> Value {
        let mut counts = Map::new();
        for (s, n) in self.status_counts() {
            counts.insert(s.to_string(), json!(n));
        }
        let mut extrema = Map::new();
        for (k, c) in self.columns.iter().enumerate() {
            if c.axis {
                continue;
            }
            let mut lo: Option<&Row> = None;
            let mut hi: Option<&Row> = None;
            for r in self.rows.iter().filter(|r| r.status == Status::Ok && r.values[k].is_finite()) {
                if lo.is_none_or(|l| r.values[k] < l.values[k]) {
                    lo = Some(r);
                }
                if hi.is_none_or(|h| r.values[k] > h.values[k]) {
                    hi = Some(r);
                }
            }
            if let (Some(lo), Some(hi)) = (lo, hi) {
                extrema.insert(
                    c.name.clone(),
                    json!({
                        "min": lo.values[k],
                        "argmin": self.coordinates(lo),
                        "max": hi.values[k],
                        "argmax": self.coordinates(hi),
                    }),
                );
            }
        }
        let failures: Vec<Value> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.message.as_ref().map(|m| json!({"row": i, "status": r.status.as_str(), "message": m})))
            .collect();
        json!({
            "version": VERSION,
            "experiment": self.config.experiment.name(),
            "rows": self.rows.len(),
            "status": counts,
            "extrema": extrema,
            "failures": failures,
        })
    }

    /// Writes the CSV to `path` and the summary next to it with a `.json`
    /// extension. Returns the summary path.
    pub fn write(&self, path: &Path) -> io::Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        let json_path = path.with_extension("json");
        let mut text = serde_json::to_string_pretty(&self.summary()).expect("summary serialises");
        text.push('\n');
        std::fs::write(&json_path, text)?;
        Ok(json_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 2.5e-7, -4.2e20, 1e-5, 9.99e14, 1e15, f64::MIN_POSITIVE, f64::MAX] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(1e-20), "1e-20");
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert!(format_float(f64::INFINITY).parse::<f64>().unwrap().is_infinite());
    }
}
