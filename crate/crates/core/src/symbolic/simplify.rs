use std::f64::consts::FRAC_PI_2;

use super::expr::{Expression, Node};

/// Default cutoff below which coefficients are treated as dead.
pub const DEFAULT_COEF_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifyOptions {
    pub coef_epsilon: f64,
    /// Rewrite `cos(a)` as `sin(a + π/2)`; see [`normalize_phase`].
    pub normalize_phase: bool,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        Self {
            coef_epsilon: DEFAULT_COEF_EPSILON,
            normalize_phase: false,
        }
    }
}

/// Folds constants, drops terms whose coefficient is below `coef_epsilon`
/// in magnitude, flattens nested sums and products, and merges terms that
/// share a body. Never increases the node count. A negative or NaN epsilon
/// drops nothing.
pub fn simplify(expr: &Expression, coef_epsilon: f64) -> Expression {
    simplify_with(
        expr,
        &SimplifyOptions {
            coef_epsilon,
            normalize_phase: false,
        },
    )
}

pub fn simplify_with(expr: &Expression, opts: &SimplifyOptions) -> Expression {
    let s = Simplifier {
        eps: opts.coef_epsilon.max(0.0),
    };
    let out = Expression {
        vars: expr.vars.clone(),
        root: s.node(&expr.root),
    };
    if opts.normalize_phase {
        normalize_phase(&out)
    } else {
        out
    }
}

/// Rewrites every `cos(affine)` as `sin(affine + π/2)` when that removes the
/// cosine family entirely, i.e. both families occur and every cosine has an
/// affine argument. Otherwise returns the expression unchanged.
pub fn normalize_phase(expr: &Expression) -> Expression {
    let (mut sin, mut cos, mut cos_affine) = (false, false, true);
    expr.root.visit(&mut |n| match n {
        Node::Sin(_) => sin = true,
        Node::Cos(a) => {
            cos = true;
            cos_affine &= matches!(**a, Node::Affine { .. });
        }
        _ => {}
    });
    if !(sin && cos && cos_affine) {
        return expr.clone();
    }
    Expression {
        vars: expr.vars.clone(),
        root: rewrite_cos(&expr.root),
    }
}

fn rewrite_cos(n: &Node) -> Node {
    match n {
        Node::Cos(a) => match &**a {
            Node::Affine { weights, bias } => Node::Sin(Box::new(Node::Affine {
                weights: weights.clone(),
                bias: bias + FRAC_PI_2,
            })),
            other => Node::Cos(Box::new(rewrite_cos(other))),
        },
        Node::Sum(c) => Node::Sum(c.iter().map(rewrite_cos).collect()),
        Node::Product(c) => Node::Product(c.iter().map(rewrite_cos).collect()),
        Node::Scaled { coef, child } => Node::scaled(*coef, rewrite_cos(child)),
        Node::Sin(a) => Node::Sin(Box::new(rewrite_cos(a))),
        Node::Sigmoid(a) => Node::Sigmoid(Box::new(rewrite_cos(a))),
        Node::Sech(a) => Node::Sech(Box::new(rewrite_cos(a))),
        leaf => leaf.clone(),
    }
}

struct Simplifier {
    eps: f64,
}

impl Simplifier {
    fn dead(&self, c: f64) -> bool {
        c.abs() < self.eps
    }

    fn node(&self, n: &Node) -> Node {
        match n {
            Node::Constant(c) => Node::Constant(*c),
            Node::Variable(i) => Node::Variable(*i),
            Node::Affine { weights, bias } => self.affine(weights, *bias),
            Node::Scaled { coef, child } => {
                if self.dead(*coef) {
                    return Node::Constant(0.0);
                }
                let s = self.node(child);
                let (c, body) = split_coef(s);
                let c = coef * c;
                match body {
                    _ if self.dead(c) => Node::Constant(0.0),
                    Node::Product(factors) => self.finish_product(c, factors),
                    body => scale(c, body),
                }
            }
            Node::Sum(c) => self.sum(c),
            Node::Product(c) => self.product(c),
            Node::Sin(a) => unary(self.node(a), f64::sin, Node::Sin),
            Node::Cos(a) => unary(self.node(a), f64::cos, Node::Cos),
            Node::Sigmoid(a) => unary(self.node(a), crate::network::sigmoid, Node::Sigmoid),
            Node::Sech(a) => unary(self.node(a), crate::network::sech, Node::Sech),
        }
    }

    fn affine(&self, weights: &[f64], bias: f64) -> Node {
        let weights: Vec<f64> = weights.iter().map(|&w| if self.dead(w) { 0.0 } else { w }).collect();
        let bias = if self.dead(bias) { 0.0 } else { bias };
        if weights.iter().all(|&w| w == 0.0) {
            Node::Constant(bias)
        } else {
            Node::Affine { weights, bias }
        }
    }

    fn sum(&self, children: &[Node]) -> Node {
        let mut flat = Vec::new();
        for c in children {
            match self.node(c) {
                Node::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }

        let mut constant = 0.0;
        let mut linear: Option<(Vec<f64>, f64)> = None;
        let mut loose_linear = Vec::new();
        // (coefficient, body) in order of first appearance.
        let mut groups: Vec<(f64, Node)> = Vec::new();
        for term in flat {
            match term {
                Node::Constant(c) => constant += c,
                Node::Affine { weights, bias } => match &mut linear {
                    None => linear = Some((weights, bias)),
                    Some((w, b)) => {
                        w.iter_mut().zip(&weights).for_each(|(a, x)| *a += x);
                        *b += bias;
                    }
                },
                other => {
                    let (c, body) = split_coef(other);
                    if matches!(body, Node::Variable(_)) {
                        loose_linear.push((c, body));
                    } else if let Some(g) = groups.iter_mut().find(|g| g.1 == body) {
                        g.0 += c;
                    } else {
                        groups.push((c, body));
                    }
                }
            }
        }

        let mut affine = None;
        match linear {
            // Variables and constants fold into an affine map when one is present.
            Some((mut w, b)) => {
                for (c, v) in loose_linear {
                    if let Node::Variable(i) = v {
                        w[i] += c;
                    }
                }
                match self.affine(&w, b + constant) {
                    Node::Constant(k) => constant = k,
                    a => {
                        affine = Some(a);
                        constant = 0.0;
                    }
                }
            }
            None => {
                for (c, body) in loose_linear {
                    if let Some(g) = groups.iter_mut().find(|g| g.1 == body) {
                        g.0 += c;
                    } else {
                        groups.push((c, body));
                    }
                }
            }
        }
        let mut terms: Vec<Node> = groups
            .into_iter()
            .filter(|(c, _)| *c != 0.0 && !self.dead(*c))
            .map(|(c, body)| scale(c, body))
            .collect();
        terms.extend(affine);
        if constant != 0.0 && !self.dead(constant) {
            terms.push(Node::Constant(constant));
        }
        match terms.len() {
            0 => Node::Constant(0.0),
            1 => terms.pop().expect("one term"),
            _ => Node::Sum(terms),
        }
    }

    fn product(&self, children: &[Node]) -> Node {
        let mut coef = 1.0;
        let mut factors = Vec::new();
        for c in children {
            let s = self.node(c);
            let inner = match s {
                Node::Product(inner) => inner,
                other => vec![other],
            };
            for f in inner {
                match f {
                    Node::Constant(k) => coef *= k,
                    Node::Scaled { coef: k, child } => {
                        coef *= k;
                        factors.push(*child);
                    }
                    Node::Affine { weights, bias } if bias == 0.0 && single_weight(&weights).is_some() => {
                        let (i, w) = single_weight(&weights).expect("checked");
                        coef *= w;
                        factors.push(Node::Variable(i));
                    }
                    other => factors.push(other),
                }
            }
        }
        self.finish_product(coef, factors)
    }

    fn finish_product(&self, mut coef: f64, mut factors: Vec<Node>) -> Node {
        if coef == 0.0 || self.dead(coef) {
            return Node::Constant(0.0);
        }
        // A leftover coefficient folds into an affine factor for free.
        if coef != 1.0 && factors.len() > 1 {
            if let Some(f) = factors.iter_mut().find(|f| matches!(f, Node::Affine { .. })) {
                *f = scale(coef, std::mem::replace(f, Node::Constant(0.0)));
                coef = 1.0;
            }
        }
        match factors.len() {
            0 => Node::Constant(coef),
            1 => scale(coef, factors.pop().expect("one factor")),
            _ => scale(coef, Node::Product(factors)),
        }
    }
}

/// Index and value of the only nonzero weight, if there is exactly one.
fn single_weight(weights: &[f64]) -> Option<(usize, f64)> {
    let mut nz = weights.iter().enumerate().filter(|(_, w)| **w != 0.0);
    match (nz.next(), nz.next()) {
        (Some((i, &w)), None) => Some((i, w)),
        _ => None,
    }
}

fn split_coef(n: Node) -> (f64, Node) {
    match n {
        Node::Scaled { coef, child } => (coef, *child),
        other => (1.0, other),
    }
}

/// `c·body` without adding nodes where the scale can be absorbed.
fn scale(c: f64, body: Node) -> Node {
    if c == 1.0 {
        return body;
    }
    match body {
        Node::Constant(k) => Node::Constant(c * k),
        Node::Affine { weights, bias } => Node::Affine {
            weights: weights.into_iter().map(|w| c * w).collect(),
            bias: c * bias,
        },
        Node::Scaled { coef, child } => scale(c * coef, *child),
        other => Node::scaled(c, other),
    }
}

fn unary(arg: Node, f: fn(f64) -> f64, wrap: fn(Box<Node>) -> Node) -> Node {
    match arg {
        Node::Constant(k) => Node::Constant(f(k)),
        other => wrap(Box::new(other)),
    }
}
