//! Sweep configuration: a strict TOML schema per experiment.
//!
//! Validation walks the raw table rather than relying on serde so that every
//! violation in a file is reported at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    RabiEntanglement,
    RabiPhotonDist,
    RabiCoherences,
    RabiWigner,
    DickeStability,
    DickeEntanglement,
    FeedbackFidelity,
    DelayStability,
    DelayEntanglement,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::RabiEntanglement,
        Experiment::RabiPhotonDist,
        Experiment::RabiCoherences,
        Experiment::RabiWigner,
        Experiment::DickeStability,
        Experiment::DickeEntanglement,
        Experiment::FeedbackFidelity,
        Experiment::DelayStability,
        Experiment::DelayEntanglement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::RabiEntanglement => "rabi-entanglement",
            Experiment::RabiPhotonDist => "rabi-photon-dist",
            Experiment::RabiCoherences => "rabi-coherences",
            Experiment::RabiWigner => "rabi-wigner",
            Experiment::DickeStability => "dicke-stability",
            Experiment::DickeEntanglement => "dicke-entanglement",
            Experiment::FeedbackFidelity => "feedback-fidelity",
            Experiment::DelayStability => "delay-stability",
            Experiment::DelayEntanglement => "delay-entanglement",
        }
    }

    pub fn schema(self) -> Schema {
        const MODEL: &[&[&str]] = &[&["omega"], &["big_omega"], &["lambda1"], &["lambda2", "ratio"], &["gamma"]];
        const DELAY: &[&[&str]] =
            &[&["omega"], &["big_omega"], &["lambda1"], &["lambda2", "ratio"], &["gamma"], &["tau"]];
        const FEEDBACK: &[&[&str]] =
            &[&["omega"], &["big_omega"], &["lambda1"], &["lambda2", "ratio"], &["gamma_eff"], &["order", "alpha"]];
        let base = Schema { quantities: MODEL, inner: &[], truncation: &[], tolerances: &[], options: &[] };
        match self {
            Experiment::RabiEntanglement => Schema {
                truncation: &[("n_max", None), ("check", None)],
                tolerances: &[("truncation", 1e-4)],
                ..base
            },
            Experiment::RabiPhotonDist => Schema { truncation: &[("n_max", None), ("photons", Some(10))], ..base },
            Experiment::RabiCoherences => Schema { truncation: &[("n_max", None), ("photons", Some(6))], ..base },
            Experiment::RabiWigner => Schema { inner: &["im", "re"], truncation: &[("n_max", None)], ..base },
            Experiment::DickeStability | Experiment::DickeEntanglement => base,
            Experiment::FeedbackFidelity => Schema {
                quantities: FEEDBACK,
                inner: &["time"],
                truncation: &[("n_max", None)],
                options: &[("state", &["noon", "ecs"])],
                ..base
            },
            Experiment::DelayStability => Schema { quantities: DELAY, ..base },
            Experiment::DelayEntanglement => Schema {
                quantities: DELAY,
                tolerances: &[("spectral", 1e-8)],
                options: &[("noise", &["input", "loop"])],
                ..base
            },
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Keys an experiment accepts.
#[derive(Clone, Copy, Debug)]
pub struct Schema {
    /// Each entry is one physical quantity; the alternatives are mutually
    /// exclusive spellings (`ratio` sets lambda2 = ratio * lambda1). Every
    /// quantity is given once, as a parameter or as a grid axis.
    pub quantities: &'static [&'static [&'static str]],
    /// Axes evaluated inside one grid point, outermost first.
    pub inner: &'static [&'static str],
    /// Key and default; `None` marks a required key.
    pub truncation: &'static [(&'static str, Option<usize>)],
    pub tolerances: &'static [(&'static str, f64)],
    /// Key and allowed values; the first is the default.
    pub options: &'static [(&'static str, &'static [&'static str])],
}

impl Schema {
    fn is_quantity(&self, key: &str) -> bool {
        self.quantities.iter().any(|alts| alts.contains(&key))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Range { start: f64, stop: f64, count: usize },
    List { values: Vec<f64> },
}

impl AxisSpec {
    pub fn count(&self) -> usize {
        match self {
            AxisSpec::Range { count, .. } => *count,
            AxisSpec::List { values } => values.len(),
        }
    }

    /// Evenly spaced from start to stop inclusive; a single point sits at start.
    pub fn points(&self) -> Vec<f64> {
        match self {
            AxisSpec::Range { start, stop, count } => {
                if *count == 1 {
                    return vec![*start];
                }
                let h = (stop - start) / (*count - 1) as f64;
                (0..*count).map(|k| if k + 1 == *count { *stop } else { start + h * k as f64 }).collect()
            }
            AxisSpec::List { values } => values.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, AxisSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub truncation: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub options: BTreeMap<String, String>,
}

impl SweepConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// The config without run-local settings (output path, worker count).
    pub fn canonical(&self) -> SweepConfig {
        SweepConfig { output: None, workers: None, ..self.clone() }
    }

    pub fn option(&self, key: &str) -> &str {
        self.options.get(key).map(String::as_str).unwrap_or("")
    }
}

/// Every violation found in a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub fn validate_config(path: &Path) -> Result<SweepConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![e.message().to_string()]))?;
    let mut v = Validator::default();
    let cfg = v.config(&table);
    match cfg {
        Some(c) if v.errors.is_empty() => Ok(c),
        _ => Err(ConfigErrors(v.errors)),
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(n) => Some(*n as f64),
        _ => None,
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn err(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn table<'a>(&mut self, top: &'a Table, key: &str) -> Option<&'a Table> {
        match top.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.err(format!("`{key}` must be a table"));
                None
            }
        }
    }

    fn finite(&mut self, path: &str, v: &Value) -> Option<f64> {
        match as_number(v) {
            Some(x) if x.is_finite() => Some(x),
            Some(x) => {
                self.err(format!("`{path}` must be finite, got {x}"));
                None
            }
            None => {
                self.err(format!("`{path}` must be a number"));
                None
            }
        }
    }

    fn count(&mut self, path: &str, v: &Value) -> Option<usize> {
        match v {
            Value::Integer(n) if *n >= 1 => Some(*n as usize),
            Value::Integer(n) => {
                self.err(format!("`{path}` must be at least 1, got {n}"));
                None
            }
            _ => {
                self.err(format!("`{path}` must be an integer"));
                None
            }
        }
    }

    fn config(&mut self, top: &Table) -> Option<SweepConfig> {
        const TOP: [&str; 8] = ["experiment", "output", "workers", "params", "grid", "truncation", "tolerances", "options"];
        for k in top.keys() {
            if !TOP.contains(&k.as_str()) {
                self.err(format!("unknown key `{k}`"));
            }
        }
        let experiment = match top.get("experiment") {
            None => {
                self.err("missing key `experiment`".into());
                None
            }
            Some(Value::String(s)) => match s.parse::<Experiment>() {
                Ok(e) => Some(e),
                Err(e) => {
                    self.err(e);
                    None
                }
            },
            Some(_) => {
                self.err("`experiment` must be a string".into());
                None
            }
        };
        let output = match top.get("output") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => {
                self.err("`output` must be a string".into());
                None
            }
        };
        let workers = top.get("workers").and_then(|w| self.count("workers", w));
        let experiment = experiment?;
        let schema = experiment.schema();

        let params = self.params(top, &schema);
        let (grid, axes) = self.grid(top, &schema);
        self.quantities(&schema, &params, &axes);
        let truncation = self.truncation(top, &schema);
        let tolerances = self.tolerances(top, &schema);
        let options = self.options(top, &schema);
        let cfg = SweepConfig { experiment, output, workers, params, grid, truncation, tolerances, options };
        self.cross_checks(&cfg);
        Some(cfg)
    }

    fn params(&mut self, top: &Table, schema: &Schema) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let Some(t) = self.table(top, "params") else { return out };
        for (k, v) in t {
            if !schema.is_quantity(k) {
                self.err(format!("unknown key `params.{k}`"));
                continue;
            }
            if let Some(x) = self.finite(&format!("params.{k}"), v) {
                out.insert(k.clone(), x);
            }
        }
        out
    }

    /// Valid axes, and the names of all known axes present even if malformed.
    fn grid(&mut self, top: &Table, schema: &Schema) -> (BTreeMap<String, AxisSpec>, Vec<String>) {
        let mut out = BTreeMap::new();
        let mut names = Vec::new();
        let Some(t) = self.table(top, "grid") else { return (out, names) };
        for (k, v) in t {
            let inner = schema.inner.contains(&k.as_str());
            if !inner && !schema.is_quantity(k) {
                self.err(format!("unknown key `grid.{k}`"));
                continue;
            }
            names.push(k.clone());
            let Value::Table(axis) = v else {
                self.err(format!("`grid.{k}` must be a table"));
                continue;
            };
            if let Some(spec) = self.axis(k, axis, inner) {
                out.insert(k.clone(), spec);
            }
        }
        (out, names)
    }

    fn axis(&mut self, name: &str, t: &Table, inner: bool) -> Option<AxisSpec> {
        let before = self.errors.len();
        for k in t.keys() {
            if !["start", "stop", "count", "values"].contains(&k.as_str()) {
                self.err(format!("unknown key `grid.{name}.{k}`"));
            }
        }
        if let Some(values) = t.get("values") {
            if inner {
                self.err(format!("`grid.{name}` must be given as start, stop, count"));
            }
            if t.contains_key("start") || t.contains_key("stop") || t.contains_key("count") {
                self.err(format!("`grid.{name}` mixes `values` with start, stop, count"));
            }
            let Value::Array(arr) = values else {
                self.err(format!("`grid.{name}.values` must be an array of numbers"));
                return None;
            };
            if arr.is_empty() {
                self.err(format!("`grid.{name}.values` must hold at least one value"));
            }
            let xs: Vec<f64> = arr
                .iter()
                .enumerate()
                .filter_map(|(i, x)| self.finite(&format!("grid.{name}.values[{i}]"), x))
                .collect();
            return (self.errors.len() == before).then_some(AxisSpec::List { values: xs });
        }
        let mut get = |key: &str| match t.get(key) {
            Some(v) => Some(v),
            None => {
                self.err(format!("missing key `grid.{name}.{key}`"));
                None
            }
        };
        let (start, stop, count) = (get("start"), get("stop"), get("count"));
        let start = start.and_then(|v| self.finite(&format!("grid.{name}.start"), v));
        let stop = stop.and_then(|v| self.finite(&format!("grid.{name}.stop"), v));
        let count = count.and_then(|v| self.count(&format!("grid.{name}.count"), v));
        match (start, stop, count) {
            (Some(start), Some(stop), Some(count)) if self.errors.len() == before => {
                Some(AxisSpec::Range { start, stop, count })
            }
            _ => None,
        }
    }

    fn quantities(&mut self, schema: &Schema, params: &BTreeMap<String, f64>, axes: &[String]) {
        let on_grid = |k: &str| axes.iter().any(|a| a == k);
        for alts in schema.quantities {
            let given: Vec<&str> = alts.iter().copied().filter(|k| params.contains_key(*k) || on_grid(k)).collect();
            for k in &given {
                if params.contains_key(*k) && on_grid(k) {
                    self.err(format!("`{k}` is given both in `params` and as a grid axis"));
                }
            }
            match given.len() {
                0 if alts.len() == 1 => self.err(format!("missing key `params.{}` (or a `grid.{}` axis)", alts[0], alts[0])),
                0 => self.err(format!("missing key: one of {}", alts.iter().map(|k| format!("`params.{k}`")).collect::<Vec<_>>().join(", "))),
                1 => {}
                _ => self.err(format!("keys {} are mutually exclusive", given.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", "))),
            }
        }
        for k in schema.inner {
            if !on_grid(k) {
                self.err(format!("missing key `grid.{k}`"));
            }
        }
    }

    fn truncation(&mut self, top: &Table, schema: &Schema) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        let t = self.table(top, "truncation");
        if let Some(t) = t {
            for (k, v) in t {
                if !schema.truncation.iter().any(|(name, _)| name == k) {
                    self.err(format!("unknown key `truncation.{k}`"));
                    continue;
                }
                match v {
                    Value::Integer(n) if *n >= 0 => {
                        out.insert(k.clone(), *n as usize);
                    }
                    Value::Integer(n) => self.err(format!("`truncation.{k}` must be nonnegative, got {n}")),
                    _ => self.err(format!("`truncation.{k}` must be an integer")),
                }
            }
        }
        for (k, default) in schema.truncation {
            if t.is_some_and(|t| t.contains_key(*k)) {
                continue;
            }
            match default {
                Some(d) => {
                    out.insert(k.to_string(), *d);
                }
                None => self.err(format!("missing key `truncation.{k}`")),
            }
        }
        out
    }

    fn tolerances(&mut self, top: &Table, schema: &Schema) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = schema.tolerances.iter().map(|(k, d)| (k.to_string(), *d)).collect();
        let Some(t) = self.table(top, "tolerances") else { return out };
        for (k, v) in t {
            if !out.contains_key(k) {
                self.err(format!("unknown key `tolerances.{k}`"));
                continue;
            }
            match self.finite(&format!("tolerances.{k}"), v) {
                Some(x) if x > 0.0 => {
                    out.insert(k.clone(), x);
                }
                Some(x) => self.err(format!("`tolerances.{k}` must be positive, got {x}")),
                None => {}
            }
        }
        out
    }

    fn options(&mut self, top: &Table, schema: &Schema) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> =
            schema.options.iter().map(|(k, choices)| (k.to_string(), choices[0].to_string())).collect();
        let Some(t) = self.table(top, "options") else { return out };
        for (k, v) in t {
            let Some((_, choices)) = schema.options.iter().find(|(name, _)| name == k) else {
                self.err(format!("unknown key `options.{k}`"));
                continue;
            };
            match v {
                Value::String(s) if choices.contains(&s.as_str()) => {
                    out.insert(k.clone(), s.clone());
                }
                _ => self.err(format!("`options.{k}` must be one of {}", choices.join(", "))),
            }
        }
        out
    }

    fn cross_checks(&mut self, cfg: &SweepConfig) {
        let values = |k: &str| -> Vec<f64> {
            cfg.params.get(k).map(|x| vec![*x]).or_else(|| cfg.grid.get(k).map(AxisSpec::points)).unwrap_or_default()
        };
        if cfg.experiment == Experiment::FeedbackFidelity {
            let state = cfg.option("state");
            let (wanted, other) = if state == "noon" { ("order", "alpha") } else { ("alpha", "order") };
            let has = |k: &str| cfg.params.contains_key(k) || cfg.grid.contains_key(k);
            if has(other) {
                self.err(format!("`{other}` does not apply to state `{state}`; give `{wanted}`"));
            }
            if values("order").iter().any(|x| *x < 1.0 || x.fract() != 0.0) {
                self.err("`order` must take positive integer values".into());
            }
        }
        let n_max = cfg.truncation.get("n_max").copied();
        if let (Some(n), Some(k)) = (n_max, cfg.truncation.get("photons")) {
            if *k > n {
                self.err(format!("`truncation.photons` ({k}) exceeds `truncation.n_max` ({n})"));
            }
        }
        if let (Some(n), Some(k)) = (n_max, cfg.truncation.get("check")) {
            if *k == n {
                self.err("`truncation.check` must differ from `truncation.n_max`".into());
            }
        }
        if cfg.experiment == Experiment::RabiEntanglement && n_max == Some(0) {
            self.err("`truncation.n_max` must be at least 1".into());
        }
    }
}
