//! Result files: the records CSV, the summary document and the heatmap dump.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cirl_core::episode::PolicyLabel;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::record::RunRecord;
use crate::stats::PairedTest;

/// Create (truncate) a file up front so an unwritable path fails before
/// any computation starts.
pub fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    File::create(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_records(file: File, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

/// Per-cell rewards of one episode, for plotting outside this crate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub condition: String,
    pub policy: PolicyLabel,
    pub theta_index: usize,
    pub state: usize,
    pub row: usize,
    pub col: usize,
    pub map_reward: f64,
    pub mean_reward: f64,
    pub true_reward: f64,
}

pub fn write_heatmaps(file: File, rows: &[HeatmapRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub policy: PolicyLabel,
    pub num_features: usize,
    pub lambda: f64,
    pub eta: f64,
    pub n: usize,
    pub mean_regret: f64,
    pub mean_kl: f64,
    pub mean_reward_l2: f64,
}

/// Expert minus instructive, per measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedSummary {
    pub condition: String,
    pub num_features: usize,
    pub measure: String,
    pub test: PairedTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub num_features: usize,
    pub lambda: f64,
    pub eta: f64,
    pub n: usize,
    pub mean_regret: f64,
    pub regret_std_error: f64,
    pub mean_kl: f64,
    pub mean_reward_l2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub conditions: Vec<ConditionSummary>,
    pub paired: Vec<PairedSummary>,
    pub lambda_sweep: Vec<SweepRow>,
}

pub fn write_summary(mut file: File, summary: &Summary) -> Result<()> {
    serde_json::to_writer_pretty(&mut file, summary)?;
    file.write_all(b"\n").map_err(|e| HarnessError::Io {
        path: "summary".into(),
        source: e,
    })?;
    Ok(())
}
