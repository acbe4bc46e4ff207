//! Run configuration as read from JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::initial_data::{
    DataDescriptor, DataError, HorizonClassification, HorizonKind, InitialData,
};
use crate::jang_solver::{Boundary, Branch, SolverConfig};
use crate::verifier::{check_levels, VerifyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("no checks requested")]
    NoChecks,
    #[error(transparent)]
    Levels(#[from] VerifyError),
    #[error("data: {0}")]
    Data(#[from] DataError),
}

/// Where the initial data comes from: a descriptor inline, or a JSON file
/// holding one (relative paths resolve against the config file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    File { path: PathBuf },
    Inline(DataDescriptor),
}

impl DataSource {
    pub fn descriptor(&self, base: &Path) -> Result<DataDescriptor, ConfigError> {
        match self {
            DataSource::Inline(d) => Ok(d.clone()),
            DataSource::File { path } => read_json(&base.join(path)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Validate,
    Solve,
    Verify,
    Penrose,
    All,
}

/// The `solver` block: solver settings plus the inner boundary condition.
/// `boundary` and `branch` default to what the inner sphere calls for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(alias = "r_max")]
    pub rmax: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub series_cutoff: Option<f64>,
    pub clamp_margin: f64,
    pub cells: usize,
    pub branch: Option<Branch>,
    pub boundary: Option<Boundary>,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverBlock {
            rmax: d.r_max,
            rtol: d.rtol,
            atol: d.atol,
            series_cutoff: d.series_cutoff,
            clamp_margin: d.clamp_margin,
            cells: d.cells,
            branch: None,
            boundary: None,
        }
    }
}

impl SolverBlock {
    /// Solver settings and boundary condition for data whose inner sphere
    /// is classified as `horizon`.
    pub fn resolve(&self, horizon: &HorizonClassification) -> (SolverConfig, Boundary) {
        let boundary = self.boundary.unwrap_or(match horizon.kind {
            HorizonKind::Past => Boundary::PastHorizon,
            HorizonKind::Future => Boundary::FutureHorizon,
            HorizonKind::Both | HorizonKind::Absent => Boundary::Alpha(0.0),
        });
        let branch = self.branch.unwrap_or(match boundary {
            Boundary::FutureHorizon => Branch::ThetaPlus,
            _ => Branch::ThetaMinus,
        });
        let config = SolverConfig {
            r_max: self.rmax,
            rtol: self.rtol,
            atol: self.atol,
            series_cutoff: self.series_cutoff,
            clamp_margin: self.clamp_margin,
            branch,
            cells: self.cells,
        };
        (config, boundary)
    }
}

fn default_checks() -> Vec<Check> {
    vec![Check::All]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub data: DataSource,
    #[serde(default)]
    pub solver: SolverBlock,
    /// Grid cells per refinement level, each doubling the previous.
    /// Defaults to `cells`, `2 cells`, `4 cells`.
    #[serde(default)]
    pub levels: Option<Vec<usize>>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let mut c: RunConfig = read_json(path)?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    /// Last stage needed to cover every requested check.
    pub fn depth(&self) -> Result<Check, ConfigError> {
        let deepest = self
            .checks
            .iter()
            .max()
            .copied()
            .ok_or(ConfigError::NoChecks)?;
        Ok(if deepest == Check::All {
            Check::Penrose
        } else {
            deepest
        })
    }

    pub fn levels(&self) -> Result<Vec<usize>, ConfigError> {
        let levels = self.levels.clone().unwrap_or_else(|| {
            let c = self.solver.cells;
            vec![c, 2 * c, 4 * c]
        });
        check_levels(&levels)?;
        Ok(levels)
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| match &self.data {
            DataSource::Inline(DataDescriptor::Builtin { family, .. }) => family.clone(),
            DataSource::Inline(DataDescriptor::Sampled { .. }) => "sampled".into(),
            DataSource::File { path } => path.display().to_string(),
        })
    }

    pub fn load_data(&self) -> Result<(DataDescriptor, InitialData), ConfigError> {
        let desc = self.data.descriptor(&self.base_dir)?;
        let data = desc.build()?;
        Ok((desc, data))
    }
}

/// Batch list: config file paths (relative to the list) or inline configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BatchEntry {
    Path(PathBuf),
    Inline(Box<RunConfig>),
}

pub fn read_batch(path: &Path) -> Result<Vec<RunConfig>, ConfigError> {
    let entries: Vec<BatchEntry> = read_json(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    entries
        .into_iter()
        .map(|e| match e {
            BatchEntry::Path(p) => RunConfig::from_path(&base.join(p)),
            BatchEntry::Inline(c) => Ok(RunConfig {
                base_dir: base.clone(),
                ..*c
            }),
        })
        .collect()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })
}
