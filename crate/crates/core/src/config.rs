//! TOML run configuration. Unknown keys anywhere are an error.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ModelSpec, DEFAULT_THRESHOLD};
use crate::task::TaskSpec;

/// Where the raw data comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskSource {
    /// A built-in task on CSV files.
    Files(String),
    /// A built-in task on generated data (`synthetic:<id>`).
    Synthetic(String),
}

impl TaskSource {
    pub fn parse(s: &str) -> Result<TaskSource> {
        let (synthetic, id) = match s.strip_prefix("synthetic:") {
            Some(id) => (true, id),
            None => (false, s),
        };
        TaskSpec::builtin(id)?;
        if !synthetic && id == "ar1" {
            return Err(Error::Config("task `ar1` exists only as `synthetic:ar1`".into()));
        }
        Ok(if synthetic { TaskSource::Synthetic(id.into()) } else { TaskSource::Files(id.into()) })
    }

    pub fn id(&self) -> &str {
        match self {
            TaskSource::Files(id) | TaskSource::Synthetic(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// CSV files with a leading `date` column; their columns are outer-joined.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    /// Calendar of generated data.
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub end: Option<NaiveDate>,
}

fn k_default() -> u32 {
    8
}

fn step_default() -> u32 {
    6
}

fn two() -> u32 {
    2
}

fn pad_cutoff() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    #[serde(default = "k_default")]
    pub k_years: u32,
    #[serde(default = "step_default")]
    pub step_months: u32,
    #[serde(default = "two")]
    pub test_years: u32,
    /// Adapter contexts longer than this extend the test span by their length.
    #[serde(default = "pad_cutoff")]
    pub context_pad_cutoff: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig { k_years: 8, step_months: 6, test_years: 2, context_pad_cutoff: 128 }
    }
}

fn reference_default() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 22).expect("valid date")
}

fn n_max_default() -> u32 {
    14
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "reference_default")]
    pub reference: NaiveDate,
    #[serde(default = "two")]
    pub n_min: u32,
    #[serde(default = "n_max_default")]
    pub n_max: u32,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { reference: reference_default(), n_min: 2, n_max: 14 }
    }
}

fn threshold_default() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    /// Roster entry (by name) whose pretrained and untrained variants are compared.
    pub model: String,
    /// Defaults to the task's first headline horizon.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "threshold_default")]
    pub threshold: f64,
}

fn window_default() -> usize {
    21
}

fn signal_threshold() -> f64 {
    0.01
}

fn quorum_default() -> usize {
    14
}

fn asset_default() -> String {
    "ief".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestConfig {
    /// Roster entry (by name) producing the forecasts.
    pub model: String,
    /// Price column of the traded asset.
    #[serde(default = "asset_default")]
    pub asset: String,
    #[serde(default = "k_default")]
    pub k_years: u32,
    #[serde(default = "step_default")]
    pub step_months: u32,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "window_default")]
    pub window: usize,
    #[serde(default = "window_default")]
    pub span: usize,
    #[serde(default = "signal_threshold")]
    pub threshold: f64,
    #[serde(default = "quorum_default")]
    pub quorum: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: String,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub data: DataConfig,
    /// Empty means the task's default native roster.
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub transfer: Option<TransferConfig>,
    #[serde(default)]
    pub backtest: Option<BacktestConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and validates a config file. Relative data paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in &mut cfg.data.files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn source(&self) -> Result<TaskSource> {
        TaskSource::parse(&self.task)
    }

    pub fn validate(&self) -> Result<()> {
        let source = self.source()?;
        match source {
            TaskSource::Files(_) if self.data.files.is_empty() => {
                return Err(Error::Config(format!("task `{}` needs [data] files", self.task)))
            }
            TaskSource::Synthetic(_) if !self.data.files.is_empty() => {
                return Err(Error::Config("synthetic tasks take no data files".into()))
            }
            _ => {}
        }
        if let Some(missing) = self.data.files.iter().find(|f| !f.is_file()) {
            return Err(Error::Config(format!("data file {} does not exist", missing.display())));
        }
        if let (Some(s), Some(e)) = (self.data.start, self.data.end) {
            if s >= e {
                return Err(Error::Config(format!("data start {s} is not before end {e}")));
            }
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.models {
            m.validate()?;
            if !names.insert(m.name()) {
                return Err(Error::Config(format!("duplicate model name `{}`", m.name())));
            }
        }
        if self.probe.n_min == 0 || self.probe.n_min > self.probe.n_max {
            return Err(Error::Config(format!("probe range {}..={} is empty", self.probe.n_min, self.probe.n_max)));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be positive".into()));
        }
        let spec = TaskSpec::builtin(source.id())?;
        for h in [self.transfer.as_ref().and_then(|t| t.horizon), self.backtest.as_ref().and_then(|b| b.horizon)]
            .into_iter()
            .flatten()
        {
            if h == 0 || h > spec.horizon {
                return Err(Error::Config(format!("horizon {h} outside 1..={}", spec.horizon)));
            }
        }
        if let Some(b) = &self.backtest {
            if b.quorum == 0 || b.quorum > b.window {
                return Err(Error::Config(format!("quorum {} must lie in 1..={}", b.quorum, b.window)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "task = \"synthetic:ar1\"\nseed = 7\nout = \"runs/x\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.evaluate.k_years, 8);
        assert_eq!(c.probe.reference, NaiveDate::from_ymd_opt(2021, 1, 22).unwrap());
        assert_eq!((c.probe.n_min, c.probe.n_max), (2, 14));
        assert_eq!(c.source().unwrap(), TaskSource::Synthetic("ar1".into()));
    }

    #[test]
    fn unknown_keys_and_missing_seed_are_rejected() {
        assert!(RunConfig::from_toml(&format!("{MINIMAL}colour = 1\n")).is_err());
        assert!(RunConfig::from_toml(&format!("{MINIMAL}[evaluate]\nk_year = 8\n")).is_err());
        assert!(RunConfig::from_toml("task = \"synthetic:ar1\"\nout = \"x\"\n").is_err());
    }

    #[test]
    fn file_tasks_need_existing_files() {
        let c = RunConfig::from_toml("task = \"bond_yield\"\nseed = 1\nout = \"x\"\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml("task = \"bond_yield\"\nseed = 1\nout = \"x\"\n[data]\nfiles = [\"/nonexistent.csv\"]\n")
            .unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(TaskSource::parse("synthetic:nope").is_err());
    }
}
