//! Training: loss terms, Adam, and the three-phase sparsifying schedule.
//!
//! The objective on a mini-batch is
//!
//! ```text
//! L = mean_batch ‖ξ − ξ̂‖² + λ_wb Σ_l (|W_l|₁ + |b_l|₁) + λ_p P
//! ```
//!
//! where `P` sums how far predictions on unlabeled inputs drawn from the
//! extrapolation region leave the admissible output box. `λ_wb` is nonzero
//! only in the lasso phase; `P` enters only on every `k`-th epoch; in the
//! final phase parameters below `δ_W` in magnitude are zeroed and frozen.

mod adam;
mod config;
mod loss;
mod report;
mod schedule;

pub use adam::{adam_step, AdamState};
pub use config::{Phase, TrainConfig};
pub use loss::{
    data_loss, l1_term, objective, penalty_inputs, penalty_term, penalty_value,
    penalty_value_and_gradient, LossTerms, ObjectiveValue, PenaltyBatch,
};
pub use report::{EpochRecord, TrainReport};
pub use schedule::{train, train_observed};
