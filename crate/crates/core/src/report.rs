//! Versioned JSON report document.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Analysis, Assessment};
use crate::engine::{LimitStateModel, SimulationConfig};
use crate::error::{Error, Result};
use crate::scenario::ExpectationCheck;
use crate::severity::{SeverityReport, WorkflowDecision};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SummaryDigest {
    pub n: u64,
    pub mean_g: f64,
    pub std_g: f64,
    pub min_g: f64,
    pub max_g: f64,
    pub failure_count: u64,
    pub stored_deficits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub model: LimitStateModel,
    pub simulation: SimulationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated_shift: Option<f64>,
    pub summary: SummaryDigest,
    pub metrics: SeverityReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessment: Option<Assessment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<WorkflowDecision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectations: Option<Vec<ExpectationCheck>>,
}

impl ReportDocument {
    pub fn new(
        analysis: &Analysis,
        simulation: &SimulationConfig,
        target_pf: Option<f64>,
        assessment: Option<Assessment>,
    ) -> Self {
        let s = &analysis.summary;
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            model: analysis.model.clone(),
            simulation: simulation.clone(),
            target_pf,
            calibrated_shift: analysis.calibrated_shift,
            summary: SummaryDigest {
                n: s.n,
                mean_g: s.mean_g,
                std_g: s.std_g(),
                min_g: s.min_g,
                max_g: s.max_g,
                failure_count: s.failure_count,
                stored_deficits: s.failure_deficits.len() as u64,
            },
            metrics: analysis.report.clone(),
            assessment,
            decision: analysis.decision.clone(),
            expectations: None,
        }
    }

    /// Pretty JSON with a trailing newline. Reals use shortest round-trip
    /// formatting, so equal documents give identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported report schemaVersion {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed write never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ReportDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReportDocument::from_json(&text)
}
