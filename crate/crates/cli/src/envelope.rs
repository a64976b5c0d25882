use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Format, RunConfig, Value};
use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Column {
    Real(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Real(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell(&self, i: usize) -> String {
        match self {
            Column::Real(v) => format!("{:.14e}", v[i]),
            Column::Text(v) => v[i].clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Column,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub tool_version: String,
    pub config_echo: RunConfig,
    pub series: Vec<Series>,
    pub summary: BTreeMap<String, Value>,
}

impl ResultEnvelope {
    pub fn new(config: &RunConfig) -> Self {
        Self { tool_version: TOOL_VERSION.to_string(), config_echo: config.clone(), series: Vec::new(), summary: BTreeMap::new() }
    }

    pub fn real(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.series.push(Series { name: name.into(), values: Column::Real(values) });
        self
    }

    pub fn text(&mut self, name: &str, values: Vec<String>) -> &mut Self {
        self.series.push(Series { name: name.into(), values: Column::Text(values) });
        self
    }

    pub fn summary(&mut self, key: &str, value: f64) -> &mut Self {
        self.summary.insert(key.into(), Value::Real(value));
        self
    }

    pub fn summary_text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.summary.insert(key.into(), Value::Text(value.into()));
        self
    }

    pub fn rows(&self) -> usize {
        self.series.first().map_or(0, |s| s.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).and_then(|s| match &s.values {
            Column::Real(v) => Some(v.as_slice()),
            Column::Text(_) => None,
        })
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).map(Value::as_f64)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let n = self.rows();
        if let Some(s) = self.series.iter().find(|s| s.values.len() != n) {
            return Err(CliError::Internal(format!("column {} has {} rows, expected {}", s.name, s.values.len(), n)));
        }
        let bad = self
            .series
            .iter()
            .find(|s| matches!(&s.values, Column::Real(v) if v.iter().any(|x| !x.is_finite())))
            .map(|s| s.name.clone())
            .or_else(|| self.summary.iter().find(|(_, v)| matches!(v, Value::Real(x) if !x.is_finite())).map(|(k, _)| k.clone()));
        if let Some(name) = bad {
            return Err(CliError::Internal(format!("non-finite value in {name}")));
        }
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        self.check()?;
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> Result<String, CliError> {
        let cfg = &self.config_echo;
        let mut out = String::new();
        out.push_str(&format!("# tool_version = {}\n# command = {}\n# seed = {}\n", self.tool_version, cfg.command, cfg.seed));
        for (k, v) in &cfg.parameters {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for (k, v) in &self.summary {
            let shown = match v {
                Value::Real(x) => format!("{x:.14e}"),
                other => other.to_string(),
            };
            out.push_str(&format!("# summary.{k} = {shown}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Internal(e.to_string());
        w.write_record(self.series.iter().map(|s| s.name.as_str())).map_err(err)?;
        for i in 0..self.rows() {
            w.write_record(self.series.iter().map(|s| s.values.cell(i))).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))?);
        Ok(out)
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
