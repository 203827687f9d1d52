use super::expr::{Expression, Node};
use crate::error::{Error, Result};

/// Reads the infix form produced by [`Expression::to_text`]. Linear
/// sub-expressions come back as affine maps.
pub fn parse(text: &str, vars: &[String]) -> Result<Expression> {
    let mut p = Parser { text, pos: 0, vars };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Expression::new(vars.to_vec(), linearize(root, vars.len()))
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expression {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(negate(t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Node::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Node> {
        let mut coef = 1.0;
        let mut factors = Vec::new();
        let mut push = |f: Node, coef: &mut f64| match f {
            Node::Constant(c) => *coef *= c,
            Node::Scaled { coef: c, child } => {
                *coef *= c;
                factors.push(*child);
            }
            other => factors.push(other),
        };
        let first = self.factor()?;
        push(first, &mut coef);
        while self.eat('*') {
            let f = self.factor()?;
            push(f, &mut coef);
        }
        let body = match factors.len() {
            0 => return Ok(Node::Constant(coef)),
            1 => factors.pop().expect("one factor"),
            _ => Node::Product(factors),
        };
        Ok(if coef == 1.0 { body } else { Node::scaled(coef, body) })
    }

    fn factor(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(negate(self.factor()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(e);
        }
        let text = self.text;
        let rest = &text[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Err(self.err("unexpected end of input"));
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if !(c.is_alphabetic() || c == '_') {
            return Err(self.err("expected a number, name or '('"));
        }
        let len = rest
            .char_indices()
            .find(|&(_, ch)| !(ch.is_alphanumeric() || ch == '_'))
            .map_or(rest.len(), |(i, _)| i);
        let start = self.pos;
        let name = &rest[..len];
        self.pos += len;
        let func: Option<fn(Box<Node>) -> Node> = match name {
            "sin" => Some(Node::Sin),
            "cos" => Some(Node::Cos),
            "sigmoid" | "σ" => Some(Node::Sigmoid),
            "sech" => Some(Node::Sech),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat('(') {
                return Err(self.err("expected '(' after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(f(Box::new(arg)));
        }
        match self.vars.iter().position(|v| v == name) {
            Some(i) => Ok(Node::Variable(i)),
            None => {
                self.pos = start;
                Err(self.err(&format!("unknown name '{name}'")))
            }
        }
    }

    fn number(&mut self) -> Result<Node> {
        let rest = self.rest();
        let b = rest.as_bytes();
        let mut i = 0;
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let v: f64 = rest[..i].parse().map_err(|_| self.err("malformed number"))?;
        self.pos += i;
        Ok(Node::Constant(v))
    }
}

fn negate(n: Node) -> Node {
    match n {
        Node::Constant(c) => Node::Constant(-c),
        Node::Scaled { coef, child } => Node::Scaled { coef: -coef, child },
        other => Node::scaled(-1.0, other),
    }
}

/// Rebuilds affine maps from sums of scaled variables and constants.
fn linearize(n: Node, n_vars: usize) -> Node {
    let n = match n {
        Node::Sum(c) => Node::Sum(c.into_iter().map(|x| linearize(x, n_vars)).collect()),
        Node::Product(c) => Node::Product(c.into_iter().map(|x| linearize(x, n_vars)).collect()),
        Node::Scaled { coef, child } => Node::scaled(coef, linearize(*child, n_vars)),
        Node::Sin(c) => Node::Sin(Box::new(linearize(*c, n_vars))),
        Node::Cos(c) => Node::Cos(Box::new(linearize(*c, n_vars))),
        Node::Sigmoid(c) => Node::Sigmoid(Box::new(linearize(*c, n_vars))),
        Node::Sech(c) => Node::Sech(Box::new(linearize(*c, n_vars))),
        leaf => leaf,
    };
    let pieces: &[Node] = match &n {
        Node::Sum(c) => c,
        Node::Scaled { child, .. } if matches!(**child, Node::Variable(_)) => std::slice::from_ref(&n),
        _ => return n,
    };
    let mut weights = vec![0.0; n_vars];
    let mut bias = 0.0;
    let mut has_var = false;
    for p in pieces {
        match p {
            Node::Constant(c) => bias += c,
            Node::Affine { weights: w, bias: b } => {
                weights.iter_mut().zip(w).for_each(|(a, x)| *a += x);
                bias += b;
                has_var = true;
            }
            Node::Variable(i) => {
                weights[*i] += 1.0;
                has_var = true;
            }
            Node::Scaled { coef, child } => match **child {
                Node::Variable(i) => {
                    weights[i] += coef;
                    has_var = true;
                }
                _ => return n,
            },
            _ => return n,
        }
    }
    if has_var {
        Node::Affine { weights, bias }
    } else {
        n
    }
}
