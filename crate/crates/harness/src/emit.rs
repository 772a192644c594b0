//! Trace files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audit::Summary;
use crate::error::{config, Result};
use crate::trace::Trace;

pub const SCHEMA_VERSION: &str = "1";

pub const CSV_COLUMNS: [&str; 8] = [
    "t",
    "alpha",
    "beta",
    "B_over_beta",
    "learner_loss",
    "best_expert_loss",
    "bound",
    "slack",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub schema_version: String,
    pub trace: Trace,
    #[serde(default)]
    pub summary: Option<Summary>,
}

fn number(v: f64) -> String {
    format!("{v}")
}

/// One row per record under the fixed header; a step without checks leaves
/// `bound` and `slack` empty.
pub fn write_csv<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &trace.records {
        w.write_record([
            r.t.to_string(),
            number(r.alpha),
            number(r.beta),
            number(r.b_over_beta),
            number(r.learner_loss),
            number(r.best_expert_loss),
            r.bound.map(number).unwrap_or_default(),
            r.slack.map(number).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(trace: &Trace, summary: Option<&Summary>, mut out: W) -> Result<()> {
    let doc = TraceDocument {
        schema_version: SCHEMA_VERSION.into(),
        trace: trace.clone(),
        summary: summary.cloned(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn parse_json(text: &str) -> Result<TraceDocument> {
    let doc: TraceDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(config(format!(
            "unsupported trace schema version `{}`",
            doc.schema_version
        )));
    }
    Ok(doc)
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    Ok(parse_json(&std::fs::read_to_string(path)?)?.trace)
}

pub fn emit(trace: &Trace, summary: &Summary, format: Format, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(trace, &mut out)?,
        Format::Json => write_json(trace, Some(summary), &mut out)?,
    }
    out.flush()?;
    Ok(())
}
