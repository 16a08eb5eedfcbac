//! CSV and JSON export of trace bundles.
//!
//! CSV: one file per trace type (`coef.csv`, `spat.csv`, `rmse.csv`,
//! `exev.csv`, `infd.csv`, `lr.csv`), first column `m`. Numbers use the
//! shortest representation that round-trips; non-finite values are written
//! as `inf` / `-inf`, and absent inferior-direction rows as empty cells.
//!
//! JSON: a single `traces.json` document, see [`bundle_to_json`].

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::trace::{TraceBundle, TraceType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown export format `{other}` (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        })
    }
}

/// Formats a number for export: shortest round-trip form, `inf` for infinity.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// JSON encoding of a number; non-finite values become the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(format_number(v))
    }
}

fn json_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| json_number(x)).collect())
}

fn json_rows(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| json_vec(r)).collect())
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(contents).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// CSV text for one trace type.
pub fn trace_csv(bundle: &TraceBundle, trace: TraceType) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header = vec!["m".to_owned()];
    header.extend(trace.headers(bundle));
    w.write_record(&header)?;
    let width = header.len() - 1;
    for (m, row) in bundle.lattice().iter().zip(trace.rows(bundle)) {
        let mut rec = vec![format_number(*m)];
        match row {
            Some(vals) => rec.extend(vals.iter().map(|&v| format_number(v))),
            None => rec.extend(std::iter::repeat_n(String::new(), width)),
        }
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// The JSON document for a bundle.
///
/// Top-level keys: `kind`, `mode`, `p`, `steps`, `q`, `mStar`, `deltaStar`,
/// `knotIndex`, `degenerateKnot`, `coefNames`, `m`, `coef`, `spat`, `rmse`,
/// `exev`, `infd` (rows may be `null`), `lr`, and `displaySlopes` for YonX.
pub fn bundle_to_json(bundle: &TraceBundle) -> Value {
    let path = &bundle.path;
    json!({
        "kind": path.kind,
        "mode": bundle.mode,
        "p": path.p,
        "steps": path.steps,
        "q": path.q.map(json_number),
        "mStar": json_number(path.m_star),
        "deltaStar": json_vec(&path.delta_star),
        "knotIndex": path.knot_index,
        "degenerateKnot": path.degenerate_knot,
        "coefNames": bundle.coef_names,
        "m": json_vec(&path.lattice),
        "kValues": path.k_values.as_deref().map(json_vec),
        "displaySlopes": path.display_slopes.as_ref().map(|s| json_vec(s)),
        "coef": json_rows(&bundle.coef),
        "spat": json_rows(&bundle.spat),
        "rmse": json_rows(&bundle.rmse),
        "exev": json_rows(&bundle.exev),
        "infd": Value::Array(
            bundle
                .infd
                .iter()
                .map(|r| r.as_deref().map_or(Value::Null, json_vec))
                .collect()
        ),
        "lr": json_vec(&bundle.lr),
    })
}

/// Writes the bundle under `dir` (created if missing) and returns the files written.
pub fn export_traces(
    bundle: &TraceBundle,
    format: ExportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        ExportFormat::Csv => TraceType::ALL
            .iter()
            .map(|&t| {
                let path = dir.join(format!("{}.csv", t.name()));
                write_atomic(&path, trace_csv(bundle, t)?.as_bytes())?;
                Ok(path)
            })
            .collect(),
        ExportFormat::Json => {
            let path = dir.join("traces.json");
            let text = serde_json::to_string_pretty(&bundle_to_json(bundle))?;
            write_atomic(&path, text.as_bytes())?;
            Ok(vec![path])
        }
    }
}

/// A trace CSV read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub headers: Vec<String>,
    pub m: Vec<f64>,
    /// `None` for an empty row (absent inferior direction).
    pub rows: Vec<Option<Vec<f64>>>,
}

/// Parses a CSV produced by [`export_traces`].
pub fn read_trace_csv(path: &Path) -> Result<TraceTable> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut m = Vec::new();
    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |k: usize, s: &str| {
            s.parse::<f64>().map_err(|_| Error::NonNumeric {
                column: headers[k].clone(),
                row: row + 1,
                value: s.to_owned(),
            })
        };
        m.push(parse(0, &record[0])?);
        if record.iter().skip(1).all(str::is_empty) {
            rows.push(None);
        } else {
            let vals = record
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, s)| parse(k, s))
                .collect::<Result<Vec<_>>>()?;
            rows.push(Some(vals));
        }
    }
    Ok(TraceTable { headers, m, rows })
}
