use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::expr::Expression;
use crate::error::{Error, Result};

pub const EXPRESSION_FORMAT: &str = "tp-eqln-expressions";
pub const EXPRESSION_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ExpressionFile {
    format: String,
    version: u32,
    /// Rendered text, for reading; ignored on load.
    text: Vec<String>,
    expressions: Vec<Expression>,
}

/// Writes expressions as JSON with exact coefficients.
pub fn save_expressions(exprs: &[Expression], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ExpressionFile {
        format: EXPRESSION_FORMAT.to_string(),
        version: EXPRESSION_VERSION,
        text: exprs.iter().map(Expression::to_text).collect(),
        expressions: exprs.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn load_expressions(path: impl AsRef<Path>) -> Result<Vec<Expression>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ExpressionFile = serde_json::from_str(&text)?;
    if file.format != EXPRESSION_FORMAT {
        return Err(Error::Config(format!("{} is not an expression file", path.display())));
    }
    if file.version != EXPRESSION_VERSION {
        return Err(Error::Version {
            kind: "expression",
            found: file.version,
            expected: EXPRESSION_VERSION,
        });
    }
    for e in &file.expressions {
        e.validate()?;
    }
    Ok(file.expressions)
}
