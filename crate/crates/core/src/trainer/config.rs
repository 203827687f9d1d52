use serde::{Deserialize, Serialize};

use crate::datasets::TaskDataset;
use crate::domain::{validate_box, Interval};
use crate::error::{Error, Result};

/// Training phase for an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Data term (and penalty) only.
    Free,
    /// Adds the L1 term.
    Lasso,
    /// L1 off, magnitude pruning on.
    Prune,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lambda_wb: f64,
    pub lambda_p: f64,
    pub penalty_every_k: usize,
    pub penalty_samples: usize,
    pub prune_threshold: f64,
    /// Admissible output box, one interval per output dimension.
    pub output_bounds: Vec<Interval>,
    /// Box from which penalty task parameters are drawn.
    pub penalty_gamma_domain: Vec<Interval>,
    /// Optional inner box rejected while sampling (the training range), so
    /// penalty inputs come from the extrapolation region only.
    pub penalty_gamma_exclude: Vec<Interval>,
    /// Range of the (normalized) time input for penalty samples.
    pub penalty_t_range: Interval,
    pub phase1_end: f64,
    pub phase2_end: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            batch_size: 150,
            learning_rate: 4e-3,
            lambda_wb: 4e-3,
            lambda_p: 1e-6,
            penalty_every_k: 50,
            penalty_samples: 100,
            prune_threshold: 0.01,
            output_bounds: Vec::new(),
            penalty_gamma_domain: Vec::new(),
            penalty_gamma_exclude: Vec::new(),
            penalty_t_range: Interval::new(0.0, 1.0),
            phase1_end: 0.25,
            phase2_end: 0.75,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    /// Defaults with the penalty domains and output box taken from a dataset.
    pub fn for_dataset(ds: &TaskDataset) -> Self {
        let mut cfg = Self::default();
        cfg.fill_domains(ds);
        cfg
    }

    /// Fills any empty domain field from the dataset.
    pub fn fill_domains(&mut self, ds: &TaskDataset) {
        if self.output_bounds.is_empty() {
            self.output_bounds = ds.output_bounds.clone();
        }
        if self.penalty_gamma_domain.is_empty() {
            self.penalty_gamma_domain = ds.gamma_domain.clone();
            if self.penalty_gamma_exclude.is_empty() {
                self.penalty_gamma_exclude = ds.training_domain.clone();
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(0.0 < self.phase1_end && self.phase1_end < self.phase2_end && self.phase2_end < 1.0) {
            return Err(Error::Config(format!(
                "phase boundaries must satisfy 0 < phase1_end < phase2_end < 1, got {} and {}",
                self.phase1_end, self.phase2_end
            )));
        }
        for (name, v) in [
            ("lambda_wb", self.lambda_wb),
            ("lambda_p", self.lambda_p),
            ("prune_threshold", self.prune_threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite value >= 0")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return Err(Error::Config("Adam needs beta1, beta2 in [0, 1) and epsilon > 0".into()));
        }
        validate_box("output_bounds", &self.output_bounds)?;
        validate_box("penalty_gamma_domain", &self.penalty_gamma_domain)?;
        validate_box("penalty_gamma_exclude", &self.penalty_gamma_exclude)?;
        validate_box("penalty_t_range", &[self.penalty_t_range])?;
        if !self.penalty_gamma_exclude.is_empty()
            && self.penalty_gamma_exclude.len() != self.penalty_gamma_domain.len()
        {
            return Err(Error::Config("penalty_gamma_exclude must match penalty_gamma_domain".into()));
        }
        Ok(())
    }

    /// Whether the penalty term is used at all.
    pub fn penalty_enabled(&self) -> bool {
        self.lambda_p > 0.0 && self.penalty_every_k > 0 && self.penalty_samples > 0
    }

    /// Checks the penalty domains against a network's input and output widths.
    pub fn validate_penalty_dims(&self, input_dim: usize, output_dim: usize) -> Result<()> {
        if self.output_bounds.len() != output_dim {
            return Err(Error::Config(format!(
                "penalty needs {output_dim} output bounds, {} configured",
                self.output_bounds.len()
            )));
        }
        // A time-only network has no task-parameter inputs to sample.
        if input_dim > 1 && self.penalty_gamma_domain.len() + 1 != input_dim {
            return Err(Error::Config(format!(
                "penalty needs a {}-dimensional task-parameter domain, {} configured",
                input_dim - 1,
                self.penalty_gamma_domain.len()
            )));
        }
        Ok(())
    }

    /// Phase of a 1-based epoch index.
    pub fn phase(&self, epoch: usize) -> Phase {
        let e = epoch as f64;
        let total = self.epochs as f64;
        if e <= self.phase1_end * total {
            Phase::Free
        } else if e <= self.phase2_end * total {
            Phase::Lasso
        } else {
            Phase::Prune
        }
    }

    pub fn penalty_active(&self, epoch: usize) -> bool {
        self.penalty_enabled() && epoch.is_multiple_of(self.penalty_every_k)
    }

    pub fn lambda_wb_at(&self, epoch: usize) -> f64 {
        if self.phase(epoch) == Phase::Lasso {
            self.lambda_wb
        } else {
            0.0
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
