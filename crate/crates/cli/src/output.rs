//! CSV writers and the JSON sidecar manifest.

use anyhow::{bail, Context, Result};
use polarlet::signal::{GridSpec, SampledSignal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Sampled 2D grid as `x,y,value` rows, last axis fastest.
pub fn write_grid_csv(path: &Path, s: &SampledSignal) -> Result<()> {
    if s.grid.dim() != 2 {
        bail!("grid CSV needs a 2D signal");
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?));
    w.write_record(["x", "y", "value"])?;
    for (i, v) in s.values.iter().enumerate() {
        let p = s.grid.point(i);
        w.write_record([p[0].to_string(), p[1].to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<SampledSignal> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 3 {
            bail!("{}: expected x,y,value rows", path.display());
        }
        let f = |i: usize| -> Result<f64> { rec[i].trim().parse::<f64>().with_context(|| format!("bad number {:?}", &rec[i])) };
        pts.push((f(0)?, f(1)?, f(2)?));
    }
    if pts.len() < 4 {
        bail!("{}: grid needs at least 2 × 2 samples", path.display());
    }
    let ny = pts.iter().take_while(|p| p.0 == pts[0].0).count();
    if ny < 2 || pts.len() % ny != 0 {
        bail!("{}: rows do not form a regular grid", path.display());
    }
    let nx = pts.len() / ny;
    let h = pts[1].1 - pts[0].1;
    let grid = GridSpec::new(vec![pts[0].0, pts[0].1], h, vec![nx, ny])?;
    for (i, p) in pts.iter().enumerate() {
        let q = grid.point(i);
        if (q[0] - p.0).abs() > 1e-9 * (1.0 + h) || (q[1] - p.1).abs() > 1e-9 * (1.0 + h) {
            bail!("{}: sample {i} is off the regular grid", path.display());
        }
    }
    Ok(SampledSignal::new(grid, pts.into_iter().map(|p| p.2).collect())?)
}

/// Columns of equal length under the given header names.
pub fn write_columns_csv(path: &Path, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != columns[0].len()) {
        bail!("column names and lengths do not match");
    }
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?));
    w.write_record(names)?;
    for i in 0..columns.first().map_or(0, |c| c.len()) {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Serializable rows with a header taken from the field names.
pub fn write_rows_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One-line JSON record describing a command run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// wall-clock seconds per phase
    pub timings: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, serde_json::Value>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self { command: command.to_string(), config, ..Default::default() }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_insert(0.0) += t0.elapsed().as_secs_f64();
        out
    }

    pub fn count<T: Serialize>(&mut self, key: &str, v: T) {
        self.counts.insert(key.to_string(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
    }

    pub fn metric<T: Serialize>(&mut self, key: &str, v: T) {
        self.metrics.insert(key.to_string(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
    }

    /// Writes the manifest next to `primary` as `<stem>.json`.
    pub fn write_sidecar(&mut self, primary: &Path) -> Result<PathBuf> {
        let path = primary.with_extension("json");
        let line = serde_json::to_string(self)?;
        std::fs::write(&path, line + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
