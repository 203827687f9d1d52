//! Expression trees recovered from trained networks.
//!
//! [`extract`] runs the forward pass symbolically, [`simplify`] cleans up the
//! result, and [`Expression::to_text`] / [`parse`] convert to and from the
//! infix form.

mod census;
mod expr;
mod extract;
mod file;
mod parse;
mod render;
mod simplify;

pub use census::Census;
pub use expr::{default_var_names, Expression, Node};
pub use extract::{extract, extract_with_vars};
pub use file::{load_expressions, save_expressions, EXPRESSION_FORMAT, EXPRESSION_VERSION};
pub use parse::parse;
pub use render::DEFAULT_DECIMALS;
pub use simplify::{normalize_phase, simplify, simplify_with, SimplifyOptions, DEFAULT_COEF_EPSILON};
