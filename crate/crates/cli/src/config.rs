//! Run configuration files and their resolution against task defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tp_eqln::datasets::{load_dataset, Split, TaskDataset, TaskKind};
use tp_eqln::symbolic::DEFAULT_COEF_EPSILON;
use tp_eqln::trainer::TrainConfig;
use tp_eqln::{Activation, Error, LayerSpec, Result};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TP_EQLN_OUT";
pub const DEFAULT_OUT: &str = "runs";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Named synthetic task. Exclusive with `path`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    /// Dataset file. Exclusive with `task`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<LayerSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub splits: Vec<Split>,
    pub keypoints: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            splits: vec![Split::Training, Split::Extrapolation],
            keypoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    pub simplify: bool,
    pub eps: f64,
    pub phase_normalize: bool,
}

impl Default for ExtractSection {
    fn default() -> Self {
        Self {
            simplify: false,
            eps: DEFAULT_COEF_EPSILON,
            phase_normalize: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateSection {
    /// Families to remove per run, e.g. `[["f2"], ["f3", "f4"]]`. Absent means
    /// the default sets; empty means the baseline alone.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removal_sets: Option<Vec<Vec<String>>>,
    /// Worker threads for the sweep; 0 lets the pool decide.
    pub jobs: usize,
}

/// The file format: every section optional, `[train]` keys overlay the task
/// defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Model file read by `extract` and `eval`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    pub dataset: DatasetSection,
    pub network: NetworkSection,
    pub train: toml::Table,
    pub eval: EvalSection,
    pub extract: ExtractSection,
    pub ablate: AblateSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved configuration; written to every output directory and
/// loadable as a [`RunConfig`].
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    pub dataset: DatasetSection,
    pub network: NetworkSection,
    pub train: TrainConfig,
    pub eval: EvalSection,
    pub extract: ExtractSection,
    pub ablate: AblateSection,
}

impl Resolved {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }

    /// Writes the snapshot as `<name>.toml` in the output directory.
    pub fn write_snapshot(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))?;
        let path = self.out_dir.join(format!("{name}.toml"));
        fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn parse_task(name: &str) -> Result<TaskKind> {
    name.parse()
}

/// Loads or generates the dataset the section names.
pub fn load_section(ds: &DatasetSection) -> Result<(TaskDataset, Option<TaskKind>)> {
    match (&ds.task, &ds.path) {
        (Some(_), Some(_)) => Err(Error::Config("dataset: give either task or path, not both".into())),
        (None, None) => Err(Error::Config("dataset: a task name or a dataset path is required".into())),
        (Some(t), None) => {
            let kind = parse_task(t)?;
            Ok((kind.generate(ds.seed, ds.samples)?, Some(kind)))
        }
        (None, Some(p)) => {
            let data = load_dataset(p)?;
            let kind = data.name.parse::<TaskKind>().ok();
            Ok((data, kind))
        }
    }
}

/// Output directory: flag, then config file, then the environment, then
/// `runs`.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Task defaults with the dataset's domains, overlaid by the `[train]` keys.
pub fn resolve_train(table: &toml::Table, ds: &TaskDataset, kind: Option<TaskKind>) -> Result<TrainConfig> {
    let mut base = TrainConfig::for_dataset(ds);
    if let Some(k) = kind {
        base.epochs = k.default_epochs();
        base.batch_size = k.default_batch_size();
    }
    let mut merged: toml::Table = toml::from_str(&base.to_toml())
        .map_err(|e| Error::Config(format!("internal: {e}")))?;
    for (k, v) in table {
        merged.insert(k.clone(), v.clone());
    }
    let text = toml::to_string(&merged).map_err(|e| Error::Config(format!("train: {e}")))?;
    let mut cfg = TrainConfig::from_toml(&text)?;
    cfg.fill_domains(ds);
    Ok(cfg)
}

pub fn resolve_hidden(section: &NetworkSection, kind: Option<TaskKind>) -> Vec<LayerSpec> {
    section
        .hidden
        .clone()
        .unwrap_or_else(|| kind.map_or_else(|| vec![LayerSpec::uniform(1)], TaskKind::default_hidden))
}

/// Parses `f2`, `sin`, `3`, … into a removal set.
pub fn parse_removal_set(items: &[String]) -> Result<Vec<Activation>> {
    items
        .iter()
        .flat_map(|s| s.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Activation::parse(s).ok_or_else(|| Error::Config(format!("unknown activation {s:?}"))))
        .collect()
}
