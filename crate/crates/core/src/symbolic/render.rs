use std::fmt;

use super::expr::{Expression, Node};

/// Decimal places used by [`Expression::to_text`].
pub const DEFAULT_DECIMALS: usize = 3;

impl Expression {
    /// Infix rendering with coefficients at [`DEFAULT_DECIMALS`] places.
    pub fn to_text(&self) -> String {
        self.to_text_with(DEFAULT_DECIMALS)
    }

    pub fn to_text_with(&self, decimals: usize) -> String {
        Renderer {
            vars: &self.vars,
            decimals,
        }
        .node(&self.root)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

struct Renderer<'a> {
    vars: &'a [String],
    decimals: usize,
}

impl Renderer<'_> {
    fn num(&self, c: f64) -> String {
        let s = format!("{:.*}", self.decimals, c);
        match s.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
            _ => s,
        }
    }

    fn node(&self, n: &Node) -> String {
        match n {
            Node::Constant(c) => self.num(*c),
            Node::Variable(i) => self.vars[*i].clone(),
            Node::Sum(c) => join_terms(c.iter().map(|t| self.node(t))).unwrap_or_else(|| self.num(0.0)),
            Node::Product(c) => c
                .iter()
                .enumerate()
                .map(|(k, f)| self.factor(f, k > 0))
                .collect::<Vec<_>>()
                .join("*"),
            Node::Scaled { coef, child } => format!("{}*{}", self.num(*coef), self.factor(child, true)),
            Node::Sin(c) => format!("sin({})", self.node(c)),
            Node::Cos(c) => format!("cos({})", self.node(c)),
            Node::Sigmoid(c) => format!("sigmoid({})", self.node(c)),
            Node::Sech(c) => format!("sech({})", self.node(c)),
            Node::Affine { weights, bias } => self.affine(weights, *bias),
        }
    }

    /// A multiplicand; sums and (after the first factor) negative terms are
    /// parenthesized.
    fn factor(&self, n: &Node, later: bool) -> String {
        let s = self.node(n);
        let additive = match n {
            Node::Sum(c) => c.len() > 1,
            Node::Affine { weights, bias } => weights.iter().filter(|w| **w != 0.0).count() + (*bias != 0.0) as usize > 1,
            _ => false,
        };
        if additive || (later && s.starts_with('-')) {
            format!("({s})")
        } else {
            s
        }
    }

    /// Time (the last input) first, then the others in order, then the bias.
    fn affine(&self, weights: &[f64], bias: f64) -> String {
        let n = weights.len();
        let order = (n.saturating_sub(1)..n).chain(0..n.saturating_sub(1));
        let mut terms = Vec::new();
        for i in order {
            let w = weights[i];
            let name = &self.vars[i];
            if w == 0.0 {
                continue;
            } else if w == 1.0 {
                terms.push(name.clone());
            } else if w == -1.0 {
                terms.push(format!("-{name}"));
            } else {
                terms.push(format!("{}*{name}", self.num(w)));
            }
        }
        if bias != 0.0 {
            terms.push(self.num(bias));
        }
        join_terms(terms.into_iter()).unwrap_or_else(|| self.num(0.0))
    }
}

fn join_terms(terms: impl Iterator<Item = String>) -> Option<String> {
    let mut out: Option<String> = None;
    for t in terms {
        match &mut out {
            None => out = Some(t),
            Some(s) => match t.strip_prefix('-') {
                Some(rest) => {
                    s.push_str(" - ");
                    s.push_str(rest);
                }
                None => {
                    s.push_str(" + ");
                    s.push_str(&t);
                }
            },
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::default_var_names;

    fn expr(root: Node) -> Expression {
        Expression::new(default_var_names(2), root).unwrap()
    }

    #[test]
    fn constant() {
        assert_eq!(expr(Node::Constant(3.0)).to_text(), "3.000");
        assert_eq!(expr(Node::Constant(-0.0001)).to_text(), "0.000");
    }

    #[test]
    fn scaled_cosine() {
        let e = expr(Node::scaled(
            -0.5,
            Node::Cos(Box::new(Node::Affine {
                weights: vec![-0.15, 1.2],
                bias: -1.8,
            })),
        ));
        assert_eq!(e.to_text(), "-0.500*cos(1.200*t - 0.150*γ - 1.800)");
    }

    #[test]
    fn sums_and_products() {
        let p = Node::Product(vec![
            Node::Affine {
                weights: vec![-0.016, -0.024],
                bias: 0.064,
            },
            Node::Affine {
                weights: vec![4.0, 1.0],
                bias: 0.0,
            },
        ]);
        let s = Node::Sum(vec![
            Node::scaled(-0.2, Node::Sin(Box::new(Node::Variable(0)))),
            p,
            Node::scaled(1.3, Node::Sigmoid(Box::new(Node::Variable(1)))),
            Node::Constant(-1.0),
        ]);
        assert_eq!(
            expr(s).to_text(),
            "-0.200*sin(γ) + (-0.024*t - 0.016*γ + 0.064)*(t + 4.000*γ) + 1.300*sigmoid(t) - 1.000"
        );
        let neg = Node::Product(vec![Node::Variable(1), Node::Constant(-2.0)]);
        assert_eq!(expr(neg).to_text(), "t*(-2.000)");
        let nested = Node::scaled(2.0, Node::Sum(vec![Node::Variable(0), Node::Constant(1.0)]));
        assert_eq!(expr(nested).to_text(), "2.000*(γ + 1.000)");
    }

    #[test]
    fn zero_affine() {
        let e = expr(Node::Sin(Box::new(Node::Affine {
            weights: vec![0.0, 0.0],
            bias: 0.0,
        })));
        assert_eq!(e.to_text(), "sin(0.000)");
    }
}
