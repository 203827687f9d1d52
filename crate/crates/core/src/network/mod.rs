//! Equation learner architecture, evaluation and gradients.
//!
//! Layer `l` computes `z = W y_prev + b` and then applies its units. Within a
//! layer, units appear in the fixed order identity, sin, cos, sigmoid,
//! product, sech. Every unit reads one pre-activation slot, except products,
//! which read two consecutive slots. The output layer is a plain affine map.

mod activation;
mod model;
mod serialize;
mod spec;

pub use activation::{sech, sigmoid, Activation};
pub use model::{EqlNetwork, Gradient, Layer, LayerGradient};
pub use serialize::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use spec::{LayerSpec, NetworkSpec, Unit};
