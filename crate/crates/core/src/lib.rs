//! Task-parameterized equation learner networks.
//!
//! An equation learner network (EQLN) is a feed-forward network whose hidden
//! units apply a fixed mix of elementary functions (identity, sin, cos,
//! sigmoid, pairwise product and sech). Trained with a sparsifying schedule
//! (free fit, lasso, magnitude pruning) the surviving units read off as a
//! compact analytic formula. Feeding the task parameters `γ` next to the time
//! input `t` turns that formula into a parameterized trajectory family that
//! can be queried outside the demonstrated range.
//!
//! Crate layout:
//!
//! - [`network`]: architecture, forward evaluation, reverse-mode gradients and
//!   model files.
//! - [`trainer`]: loss terms, Adam, the three-phase schedule and report CSVs.
//! - [`symbolic`]: expression extraction from a trained network,
//!   simplification, rendering and parsing.
//! - [`datasets`]: synthetic demonstration families and the dataset file
//!   format.
//! - [`metrics`]: trajectory MSE, key-point errors, model evaluation, the
//!   activation ablation and the time-only comparison.
//! - [`reference`]: hand-set networks that encode generator equations.
//!
//! Batch loops run on rayon when the `parallel` feature is on (the default).
//! Every reduction is chunked with a fixed chunk size and summed in order, so
//! results are bit-identical with and without the feature.

pub mod datasets;
pub mod domain;
pub mod error;
pub mod metrics;
pub mod network;
pub mod par;
pub mod reference;
pub mod seed;
pub mod symbolic;
pub mod trainer;

pub use error::{Error, Result};
pub use network::{Activation, EqlNetwork, Gradient, LayerSpec, NetworkSpec};
