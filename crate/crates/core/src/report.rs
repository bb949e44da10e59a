//! JSON analysis report.
//!
//! Keys are emitted in declaration order and optional sections are omitted when absent, so
//! identical inputs, flags and seeds give byte-identical files. Reals use the shortest
//! representation that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterResult;
use crate::error::{Error, Result};
use crate::hyperbolicity::DeltaStats;
use crate::io::FileFormat;
use crate::neighbor_joining::NjStats;
use crate::types::MetricTag;
use crate::ultrametricity::UltraStats;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Embeddings,
    DistanceMatrix,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub format: Option<FileFormat>,
    pub kind: InputKind,
    pub n: usize,
    /// Embedding dimension as read, before PCA. Absent for matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PcaRecord {
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RescaleRecord {
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_max_norm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessingRecord {
    pub pad: bool,
    pub pca: PcaRecord,
    pub rescale: RescaleRecord,
    /// Set when a loaded matrix was replaced by `(D + D^T) / 2` under `--force`.
    pub symmetrized: bool,
}

/// k-means output plus slots for clusterings computed elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSection {
    pub kmeans: ClusterResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmodes: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agglomerative: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub input: InputRecord,
    pub preprocessing: PreprocessingRecord,
    pub metric: MetricTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ultra: Option<UltraStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nj: Option<NjStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall-clock seconds per analysis; only filled on request since it breaks byte-identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl GeometryReport {
    pub fn new(input: InputRecord, metric: MetricTag) -> Self {
        GeometryReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            input,
            preprocessing: PreprocessingRecord::default(),
            metric,
            delta: None,
            ultra: None,
            nj: None,
            cluster: None,
            notes: Vec::new(),
            timings: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            column: e.column() as u64,
            message: e.to_string(),
        })
    }
}

pub fn write_report(report: &GeometryReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()?).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_report(path: &Path) -> Result<GeometryReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    GeometryReport::from_json(&text)
}
