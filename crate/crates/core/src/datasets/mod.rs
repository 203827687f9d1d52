//! Demonstration datasets: synthetic generators, supervised views and the
//! dataset file format.

mod file;
mod generators;
mod supervised;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::domain::{box_contains, Interval, Region};
use crate::error::{Error, Result};
use crate::network::LayerSpec;

pub use file::{load_dataset, save_dataset, DATASET_FORMAT, DATASET_VERSION};
pub use generators::{
    gaussian_bump, gen_open_box, gen_pick_place, gen_toy, toy_function, PickPlaceTask, ToyConfig,
    WORKSPACE_MAX, WORKSPACE_MIN,
};
pub(crate) use supervised::demo_inputs;
pub use supervised::{to_supervised, InputLayout, SplitSelection, SupervisedSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Training,
    Extrapolation,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Training => "training",
            Split::Extrapolation => "extrapolation",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "training" => Ok(Split::Training),
            "extrapolation" => Ok(Split::Extrapolation),
            other => Err(Error::Dataset(format!("unknown split label {other:?}"))),
        }
    }
}

/// One trajectory `ξ(t)` and the task parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub gamma: Vec<f64>,
    /// Native sample times, strictly increasing.
    pub times: Vec<f64>,
    /// `T × D` samples, one row per time.
    pub trajectory: Array2<f64>,
    /// Native time span mapped onto the network's `[0, 1]` time input.
    pub time_range: Interval,
    pub split: Split,
}

impl Demonstration {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.trajectory.ncols()
    }

    pub fn normalized_time(&self, t: f64) -> f64 {
        (t - self.time_range.lo) / self.time_range.width()
    }
}

/// A task: demonstrations with their training/extrapolation labels and the
/// domains needed for penalty sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub name: String,
    /// Full task-parameter space, one interval per parameter.
    pub gamma_domain: Vec<Interval>,
    /// Box of demonstrated (training) task parameters.
    pub training_domain: Vec<Interval>,
    /// Admissible output box (robot workspace for the robot tasks).
    pub output_bounds: Vec<Interval>,
    pub demos: Vec<Demonstration>,
}

impl TaskDataset {
    pub fn gamma_dim(&self) -> usize {
        self.gamma_domain.len()
    }

    pub fn traj_dim(&self) -> usize {
        self.output_bounds.len()
    }

    pub fn samples_per_demo(&self) -> usize {
        self.demos.first().map_or(0, Demonstration::len)
    }

    /// The part of the task-parameter space outside the training box.
    pub fn extrapolation_region(&self) -> Region {
        Region {
            outer: self.gamma_domain.clone(),
            excluded: self.training_domain.clone(),
        }
    }

    pub fn count(&self, split: Split) -> usize {
        self.demos.iter().filter(|d| d.split == split).count()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gamma_dim();
        let d = self.traj_dim();
        if self.name.is_empty() || self.name.contains(char::is_whitespace) {
            return Err(Error::Dataset(format!("invalid dataset name {:?}", self.name)));
        }
        if self.training_domain.len() != n {
            return Err(Error::Dataset("training domain dimension differs from gamma domain".into()));
        }
        let t = self.samples_per_demo();
        if t == 0 {
            return Err(Error::Dataset("dataset has no samples".into()));
        }
        for (i, demo) in self.demos.iter().enumerate() {
            if demo.gamma.len() != n {
                return Err(Error::Dataset(format!("demo {i}: gamma has {} entries, expected {n}", demo.gamma.len())));
            }
            if demo.trajectory.dim() != (t, d) || demo.times.len() != t {
                return Err(Error::Dataset(format!(
                    "demo {i}: trajectory is {:?}, expected ({t}, {d})",
                    demo.trajectory.dim()
                )));
            }
            if demo.times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Dataset(format!("demo {i}: times are not strictly increasing")));
            }
            if !demo.time_range.is_proper() {
                return Err(Error::Dataset(format!("demo {i}: empty time range")));
            }
            if demo.trajectory.iter().chain(&demo.gamma).chain(&demo.times).any(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("demo {i}: non-finite value")));
            }
        }
        if self.count(Split::Training) == 0 {
            return Err(Error::Dataset("dataset has no training demonstrations".into()));
        }
        Ok(())
    }

    /// Label a parameter vector by the training box.
    pub fn split_for(&self, gamma: &[f64]) -> Split {
        if box_contains(&self.training_domain, gamma) {
            Split::Training
        } else {
            Split::Extrapolation
        }
    }
}

/// The named synthetic tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Toy,
    Phi1,
    Phi2,
    Phi3,
    Phi4,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Toy,
        TaskKind::Phi1,
        TaskKind::Phi2,
        TaskKind::Phi3,
        TaskKind::Phi4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Toy => "toy",
            TaskKind::Phi1 => "phi1",
            TaskKind::Phi2 => "phi2",
            TaskKind::Phi3 => "phi3",
            TaskKind::Phi4 => "phi4",
        }
    }

    pub fn names() -> String {
        Self::ALL.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")
    }

    /// Generates the task. `samples` overrides the per-trajectory sample
    /// count (per-γ sample count for the toy).
    pub fn generate(self, seed: u64, samples: Option<usize>) -> Result<TaskDataset> {
        match self {
            TaskKind::Toy => {
                let mut cfg = ToyConfig {
                    seed,
                    ..ToyConfig::default()
                };
                if let Some(s) = samples {
                    cfg.samples_per_gamma = s;
                }
                gen_toy(&cfg)
            }
            TaskKind::Phi1 => gen_pick_place(PickPlaceTask::Phi1, samples.unwrap_or(200)),
            TaskKind::Phi2 => gen_pick_place(PickPlaceTask::Phi2, samples.unwrap_or(200)),
            TaskKind::Phi3 => gen_pick_place(PickPlaceTask::Phi3, samples.unwrap_or(200)),
            TaskKind::Phi4 => gen_open_box(samples.unwrap_or(200)),
        }
    }

    /// Hidden layers used for this task.
    pub fn default_hidden(self) -> Vec<LayerSpec> {
        match self {
            TaskKind::Toy => vec![LayerSpec::uniform(1)],
            TaskKind::Phi1 | TaskKind::Phi2 | TaskKind::Phi3 => vec![LayerSpec::uniform(1); 3],
            TaskKind::Phi4 => vec![LayerSpec::uniform(2)],
        }
    }

    pub fn default_batch_size(self) -> usize {
        match self {
            TaskKind::Phi4 => 50,
            _ => 150,
        }
    }

    pub fn default_epochs(self) -> usize {
        match self {
            TaskKind::Phi4 => 5_000,
            _ => 20_000,
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|t| t.name() == lower || lower == t.name().replace("phi", "φ"))
            .ok_or_else(|| Error::Config(format!("unknown task {s:?}; available tasks: {}", Self::names())))
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
