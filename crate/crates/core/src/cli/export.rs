//! Line-delimited export records.
//!
//! One JSON object per line. A run ends with a `{"summary": ...}` line; a
//! reader that hits a truncated final line (no newline, not parseable)
//! drops it with a warning, so an interrupted run still yields every
//! complete record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::synth::{InstanceMeta, TaskInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRecord {
    pub id: String,
    pub question: String,
    pub context: String,
    pub sql: String,
    pub answer: String,
    pub meta: InstanceMeta,
}

impl From<&TaskInstance> for ExportRecord {
    fn from(t: &TaskInstance) -> Self {
        Self {
            id: t.id.clone(),
            question: t.question.clone(),
            context: t.context.clone(),
            sql: t.sql.clone(),
            answer: t.answer.clone(),
            meta: t.meta.clone(),
        }
    }
}

impl ExportRecord {
    /// The record as one line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub dimension: String,
    pub bucket: String,
    pub variant: String,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub requested: u64,
    pub built: u64,
    pub failed: u64,
    /// Failed instances by error kind.
    pub failures: BTreeMap<String, u64>,
    /// Retry reasons summed over exhausted instances.
    pub retry_reasons: BTreeMap<String, u64>,
    pub under_budget: u64,
    pub histogram: Vec<HistogramEntry>,
    pub corpus_digest: String,
}

impl RunSummary {
    pub fn to_line(&self) -> String {
        serde_json::to_string(&ExportLine::Summary { summary: self.clone() }).expect("summary serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExportLine {
    Record(ExportRecord),
    Summary { summary: RunSummary },
}

pub fn parse_line(line: &str) -> Result<ExportLine, serde_json::Error> {
    serde_json::from_str(line)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportFile {
    pub records: Vec<ExportRecord>,
    pub summary: Option<RunSummary>,
    pub warnings: Vec<String>,
}

/// Parse a whole export file. Blank lines are skipped.
pub fn read_export(text: &str) -> Result<ExportFile, CliError> {
    let mut file = ExportFile::default();
    let terminated = text.ends_with('\n');
    let lines: Vec<&str> = text.split('\n').collect();
    let last = lines.len() - 1;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(ExportLine::Record(r)) => file.records.push(r),
            Ok(ExportLine::Summary { summary }) => file.summary = Some(summary),
            Err(_) if i == last && !terminated => {
                file.warnings.push(format!("line {}: ignored truncated final line", i + 1))
            }
            Err(e) => return Err(CliError::Data(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(file)
}
