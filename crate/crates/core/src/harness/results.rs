//! Result files. The tabular form is CSV with one row per record; list
//! fields (per-group values, skips) are stored as compact JSON in their
//! cells. The structured form is one JSON document with the tool name and
//! version, the config echo, and the records.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{OutputFormat, SweepParam};
use super::intersect::IntersectFlag;
use super::pipeline::{PointStatus, SweepRecord};
use crate::encoders::EncodingMethod;
use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "encfair";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of the tabular format.
pub const TABULAR_COLUMNS: [&str; 21] = [
    "encoder",
    "method",
    "param_name",
    "param_value",
    "attribute",
    "reference",
    "status",
    "error",
    "auc",
    "l_eof",
    "l_dp",
    "l_aao",
    "max_eof",
    "max_dp",
    "max_aao",
    "wall_time_ms",
    "group_auc",
    "eof",
    "dp",
    "aao",
    "skipped",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub records: Vec<SweepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersect_flags: Option<Vec<IntersectFlag>>,
}

impl ResultDocument {
    pub fn new(config: serde_json::Value, records: Vec<SweepRecord>) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            config,
            records,
            intersect_flags: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FlatRecord {
    encoder: String,
    method: EncodingMethod,
    param_name: Option<SweepParam>,
    param_value: Option<f64>,
    attribute: String,
    reference: String,
    status: PointStatus,
    error: Option<String>,
    auc: Option<f64>,
    l_eof: Option<f64>,
    l_dp: Option<f64>,
    l_aao: Option<f64>,
    max_eof: Option<f64>,
    max_dp: Option<f64>,
    max_aao: Option<f64>,
    wall_time_ms: f64,
    group_auc: String,
    eof: String,
    dp: String,
    aao: String,
    skipped: String,
}

impl FlatRecord {
    fn from_record(r: &SweepRecord) -> Result<Self> {
        Ok(Self {
            encoder: r.encoder.clone(),
            method: r.method,
            param_name: r.param_name,
            param_value: r.param_value,
            attribute: r.attribute.clone(),
            reference: r.reference.clone(),
            status: r.status,
            error: r.error.clone(),
            auc: r.auc,
            l_eof: r.l_eof,
            l_dp: r.l_dp,
            l_aao: r.l_aao,
            max_eof: r.max_eof,
            max_dp: r.max_dp,
            max_aao: r.max_aao,
            wall_time_ms: r.wall_time_ms,
            group_auc: cell(&r.group_auc)?,
            eof: cell(&r.eof)?,
            dp: cell(&r.dp)?,
            aao: cell(&r.aao)?,
            skipped: cell(&r.skipped)?,
        })
    }

    fn into_record(self) -> Result<SweepRecord> {
        Ok(SweepRecord {
            encoder: self.encoder,
            method: self.method,
            param_name: self.param_name,
            param_value: self.param_value,
            attribute: self.attribute,
            reference: self.reference,
            status: self.status,
            error: self.error,
            auc: self.auc,
            group_auc: serde_json::from_str(&self.group_auc)?,
            l_eof: self.l_eof,
            l_dp: self.l_dp,
            l_aao: self.l_aao,
            max_eof: self.max_eof,
            max_dp: self.max_dp,
            max_aao: self.max_aao,
            eof: serde_json::from_str(&self.eof)?,
            dp: serde_json::from_str(&self.dp)?,
            aao: serde_json::from_str(&self.aao)?,
            skipped: serde_json::from_str(&self.skipped)?,
            wall_time_ms: self.wall_time_ms,
        })
    }
}

fn cell<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}

pub fn write_tabular<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(FlatRecord::from_record(r)?)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_tabular<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TABULAR_COLUMNS {
        return Err(Error::HeaderMismatch(format!(
            "expected columns {TABULAR_COLUMNS:?}, found {header:?}"
        )));
    }
    r.deserialize::<FlatRecord>()
        .map(|row| row.map_err(Error::from).and_then(FlatRecord::into_record))
        .collect()
}

pub fn write_structured<W: Write>(doc: &ResultDocument, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, doc)?;
    Ok(())
}

pub fn read_structured<R: Read>(input: R) -> Result<ResultDocument> {
    Ok(serde_json::from_reader(input)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes the records. The structured form also carries the config echo
/// and tool version.
pub fn emit_results(
    doc: &ResultDocument,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    if doc.records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    let path = path.as_ref();
    let mut w = create(path)?;
    match format {
        OutputFormat::Tabular => write_tabular(&doc.records, &mut w)?,
        OutputFormat::Structured => write_structured(doc, &mut w)?,
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads records back from either format.
pub fn read_results(path: impl AsRef<Path>, format: OutputFormat) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Tabular => read_tabular(file),
        OutputFormat::Structured => Ok(read_structured(file)?.records),
    }
}
