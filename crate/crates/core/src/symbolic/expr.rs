use serde::{Deserialize, Serialize};

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::network::{sech, sigmoid};

/// Expression tree node. `Variable` and `Affine` refer to input slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Constant(f64),
    Variable(usize),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Scaled { coef: f64, child: Box<Node> },
    Sin(Box<Node>),
    Cos(Box<Node>),
    Sigmoid(Box<Node>),
    Sech(Box<Node>),
    /// `Σ weights[i]·x_i + bias` over all input variables.
    Affine { weights: Vec<f64>, bias: f64 },
}

impl Node {
    pub fn scaled(coef: f64, child: Node) -> Node {
        Node::Scaled {
            coef,
            child: Box::new(child),
        }
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&Node> {
        match self {
            Node::Constant(_) | Node::Variable(_) | Node::Affine { .. } => Vec::new(),
            Node::Sum(c) | Node::Product(c) => c.iter().collect(),
            Node::Scaled { child, .. } => vec![child],
            Node::Sin(c) | Node::Cos(c) | Node::Sigmoid(c) | Node::Sech(c) => vec![c],
        }
    }

    /// Left-to-right recursive evaluation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Constant(c) => *c,
            Node::Variable(i) => x[*i],
            Node::Sum(c) => c.iter().fold(0.0, |acc, n| acc + n.eval(x)),
            Node::Product(c) => c.iter().fold(1.0, |acc, n| acc * n.eval(x)),
            Node::Scaled { coef, child } => coef * child.eval(x),
            Node::Sin(c) => c.eval(x).sin(),
            Node::Cos(c) => c.eval(x).cos(),
            Node::Sigmoid(c) => sigmoid(c.eval(x)),
            Node::Sech(c) => sech(c.eval(x)),
            Node::Affine { weights, bias } => {
                let mut acc = *bias;
                for (w, v) in weights.iter().zip(x) {
                    acc += w * v;
                }
                acc
            }
        }
    }

    /// Node count. An affine map counts one node plus one per nonzero weight;
    /// coefficients and biases are not nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Node::Affine { weights, .. } => 1 + weights.iter().filter(|w| **w != 0.0).count(),
            _ => 1 + self.children().iter().map(|c| c.node_count()).sum::<usize>(),
        }
    }

    /// Upper bound on `|value|` when each variable lies in its interval.
    pub fn magnitude_bound(&self, bounds: &[Interval]) -> f64 {
        let var_max = |i: usize| bounds[i].lo.abs().max(bounds[i].hi.abs());
        match self {
            Node::Constant(c) => c.abs(),
            Node::Variable(i) => var_max(*i),
            Node::Sum(c) => c.iter().map(|n| n.magnitude_bound(bounds)).sum(),
            Node::Product(c) => c.iter().map(|n| n.magnitude_bound(bounds)).product(),
            Node::Scaled { coef, child } => coef.abs() * child.magnitude_bound(bounds),
            Node::Sin(_) | Node::Cos(_) | Node::Sigmoid(_) | Node::Sech(_) => 1.0,
            Node::Affine { weights, bias } => {
                bias.abs() + weights.iter().enumerate().map(|(i, w)| w.abs() * var_max(i)).sum::<f64>()
            }
        }
    }

    pub(crate) fn visit<F: FnMut(&Node)>(&self, f: &mut F) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    fn check(&self, n_vars: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Expression { pos: 0, msg });
        match self {
            Node::Variable(i) if *i >= n_vars => bad(format!("variable index {i} out of range for {n_vars} inputs")),
            Node::Affine { weights, .. } if weights.len() != n_vars => {
                bad(format!("affine map has {} weights for {n_vars} inputs", weights.len()))
            }
            _ => {
                for c in self.children() {
                    c.check(n_vars)?;
                }
                Ok(())
            }
        }
    }
}

/// An expression over named input variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expression {
    pub vars: Vec<String>,
    pub root: Node,
}

impl Expression {
    pub fn new(vars: Vec<String>, root: Node) -> Result<Self> {
        let e = Self { vars, root };
        e.validate()?;
        Ok(e)
    }

    /// Checks variable indices and affine widths against `vars`.
    pub fn validate(&self) -> Result<()> {
        self.root.check(self.vars.len())
    }

    pub fn input_dim(&self) -> usize {
        self.vars.len()
    }

    pub fn evaluate(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.vars.len() {
            return Err(Error::dim("expression input", self.vars.len(), input.len()));
        }
        Ok(self.root.eval(input))
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }
}

/// Input names for a network with inputs `[γ…, t]`: `t` for a time-only
/// input, `γ` for one task parameter, `γ1…γn` for several.
pub fn default_var_names(input_dim: usize) -> Vec<String> {
    let n = input_dim.saturating_sub(1);
    let mut names: Vec<String> = match n {
        0 => Vec::new(),
        1 => vec!["γ".to_string()],
        _ => (1..=n).map(|j| format!("γ{j}")).collect(),
    };
    if input_dim > 0 {
        names.push("t".to_string());
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Vec<String> {
        default_var_names(2)
    }

    #[test]
    fn evaluation_examples() {
        let id = Expression::new(vec!["t".into()], Node::Variable(0)).unwrap();
        assert_eq!(id.evaluate(&[3.5]).unwrap(), 3.5);
        let consts = Node::Sum(vec![Node::Constant(1.0), Node::Constant(2.0), Node::Constant(-0.5)]);
        assert_eq!(consts.eval(&[]), 2.5);
        let aff = Node::Affine {
            weights: vec![2.0, -1.0],
            bias: 0.5,
        };
        assert_eq!(aff.eval(&[1.0, 3.0]), -0.5);
    }

    #[test]
    fn names() {
        assert_eq!(default_var_names(1), ["t"]);
        assert_eq!(vars(), ["γ", "t"]);
        assert_eq!(default_var_names(4), ["γ1", "γ2", "γ3", "t"]);
    }

    #[test]
    fn validation() {
        assert!(Expression::new(vars(), Node::Variable(2)).is_err());
        let short = Node::Sin(Box::new(Node::Affine {
            weights: vec![1.0],
            bias: 0.0,
        }));
        assert!(Expression::new(vars(), short).is_err());
        assert!(Expression::new(vars(), Node::Variable(1)).unwrap().evaluate(&[1.0]).is_err());
    }

    #[test]
    fn counts_and_bounds() {
        let n = Node::scaled(
            -0.5,
            Node::Cos(Box::new(Node::Affine {
                weights: vec![-0.15, 1.2],
                bias: -1.8,
            })),
        );
        assert_eq!(n.node_count(), 5);
        assert_eq!(n.magnitude_bound(&[Interval::new(0.0, 3.0), Interval::new(0.0, 1.0)]), 0.5);
        let a = Node::Affine {
            weights: vec![2.0, -1.0],
            bias: 0.5,
        };
        assert_eq!(a.magnitude_bound(&[Interval::new(-1.0, 0.5), Interval::new(0.0, 3.0)]), 5.5);
    }
}
