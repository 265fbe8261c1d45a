//! Columnar datasets and run manifests.
//!
//! Every dataset is written twice: as CSV with a `# schema_version=N` comment
//! line above the header, and as JSON records. Numbers are rounded to a fixed
//! number of significant digits before either is written, so both files are
//! reproducible byte for byte.

use crate::error::{Result, SweepError};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits used when none is configured.
pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { schema_version: SCHEMA_VERSION, name: name.into(), columns, rows: Vec::new() }
    }

    pub fn with_columns(name: impl Into<String>, columns: &[&str]) -> Self {
        Self::new(name, columns.iter().map(|s| s.to_string()).collect())
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match columns of {}", self.name);
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Vec<f64>>) {
        for r in rows {
            self.push(r);
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self, precision: usize) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_number(x, precision))).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| SweepError::Serialize(e.to_string()))?;
        let mut out = format!("# schema_version={} dataset={}\n", self.schema_version, self.name);
        out.push_str(&String::from_utf8(body).map_err(|e| SweepError::Serialize(e.to_string()))?);
        Ok(out)
    }

    /// JSON records; non-finite values become `null`.
    pub fn to_json(&self, precision: usize) -> Result<String> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, &x) in self.columns.iter().zip(row) {
                    let v = round_to(x, precision);
                    m.insert(c.clone(), serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null));
                }
                Value::Object(m)
            })
            .collect();
        let doc = serde_json::json!({
            "schema_version": self.schema_version,
            "dataset": self.name,
            "columns": self.columns,
            "records": records,
        });
        serde_json::to_string_pretty(&doc).map_err(|e| SweepError::Serialize(e.to_string()))
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`.
    pub fn write(&self, dir: &Path, precision: usize) -> Result<Vec<PathBuf>> {
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        write_text(&csv_path, &self.to_csv(precision)?)?;
        write_text(&json_path, &self.to_json(precision)?)?;
        Ok(vec![csv_path, json_path])
    }
}

fn csv_err(e: csv::Error) -> SweepError {
    SweepError::Serialize(e.to_string())
}

/// `x` in scientific notation with `precision` significant digits.
pub fn format_number(x: f64, precision: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", precision.max(1) - 1, x)
    } else {
        format!("{x}")
    }
}

fn round_to(x: f64, precision: usize) -> f64 {
    if x.is_finite() {
        format_number(x, precision).parse().unwrap_or(x)
    } else {
        x
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| SweepError::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| SweepError::io(path, e))
}

/// One grid point as recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPoint {
    pub index: usize,
    /// Recipe-specific labels (axis values not contained in the problem).
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub labels: Map<String, Value>,
    pub problem: compton_core::DimensionlessProblem,
}

/// Everything needed to recompute the datasets of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    pub run: String,
    pub datasets: Vec<String>,
    /// The resolved configuration (recipe settings or sweep config).
    pub settings: Value,
    pub points: Vec<ManifestPoint>,
}

impl Manifest {
    pub fn new(run: impl Into<String>, settings: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: format!("compton-sweep {}", env!("CARGO_PKG_VERSION")),
            run: run.into(),
            datasets: Vec::new(),
            settings,
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, problem: compton_core::DimensionlessProblem, labels: Map<String, Value>) -> usize {
        let index = self.points.len();
        self.points.push(ManifestPoint { index, labels, problem });
        index
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SweepError::Serialize(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.run));
        write_text(&path, &self.to_json()?)?;
        Ok(path)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SweepError::Config(format!("manifest: {e}")))
    }
}

/// Datasets plus manifest of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub datasets: Vec<Dataset>,
    pub manifest: Manifest,
}

impl RunOutput {
    pub fn new(datasets: Vec<Dataset>, mut manifest: Manifest) -> Self {
        manifest.datasets = datasets.iter().map(|d| d.name.clone()).collect();
        Self { datasets, manifest }
    }

    pub fn dataset(&self, name: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.name == name)
    }

    pub fn write(&self, dir: &Path, precision: usize) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for d in &self.datasets {
            paths.extend(d.write(dir, precision)?);
        }
        paths.push(self.manifest.write(dir)?);
        Ok(paths)
    }
}
