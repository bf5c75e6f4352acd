use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::TraceConfig;
use super::dataset::DatasetParams;
use super::generate::{Trace, TraceSet};
use crate::error::{Error, Result};

const HEADER: &str = "signal,period_s,unit";

/// Points at the trace files of a scenario. Datasets are rebuilt from the
/// traces with the recorded window and split parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub trace_config: TraceConfig,
    pub files: Vec<String>,
    pub dataset: DatasetParams,
    pub split_seed: u64,
}

/// Writes header, a metadata row, then one value per line.
pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut body = format!("{HEADER}\n{},{},{}\n", trace.signal, trace.period_s, trace.unit);
    for v in &trace.values {
        body.push_str(&format!("{v}\n"));
    }
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((_, Err(e))) => Err(Error::io(path, e)),
            None => Err(Error::config(format!("{}: missing {what}", path.display()))),
        }
    };
    let (_, header) = next("header")?;
    if header.trim() != HEADER {
        return Err(Error::config(format!("{}:1: expected header `{HEADER}`", path.display())));
    }
    let (lineno, meta) = next("metadata row")?;
    let fields: Vec<&str> = meta.trim().split(',').collect();
    let [signal, period, unit] = fields[..] else {
        return Err(Error::config(format!("{}:{lineno}: expected 3 fields", path.display())));
    };
    let period_s = period
        .parse()
        .map_err(|_| Error::config(format!("{}:{lineno}: bad period `{period}`", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 = line.trim().parse().map_err(|_| {
            Error::config(format!("{}:{}: bad value `{line}`", path.display(), i + 1))
        })?;
        if !v.is_finite() {
            return Err(Error::config(format!("{}:{}: non-finite value", path.display(), i + 1)));
        }
        values.push(v);
    }
    Ok(Trace {
        signal: signal.to_string(),
        period_s,
        unit: unit.to_string(),
        values,
    })
}

/// Writes every trace as `<signal>.csv` plus `manifest.json` into `dir`,
/// creating it if needed. Returns the written paths.
pub fn write_trace_set(
    set: &TraceSet,
    dataset: &DatasetParams,
    split_seed: u64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    let mut files = Vec::new();
    for t in set.all() {
        let name = format!("{}.csv", t.signal);
        let path = dir.join(&name);
        write_trace_csv(t, &path)?;
        files.push(name);
        paths.push(path);
    }
    let manifest = DatasetManifest {
        trace_config: set.config.clone(),
        files,
        dataset: *dataset,
        split_seed,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json("manifest", e))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    paths.push(path);
    Ok(paths)
}
