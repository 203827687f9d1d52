use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::{Expression, Node};

/// Surviving nodes per function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub sin: usize,
    pub cos: usize,
    pub sigmoid: usize,
    pub sech: usize,
    pub product: usize,
}

impl Census {
    pub fn of(expr: &Expression) -> Self {
        let mut c = Self::default();
        expr.root.visit(&mut |n| match n {
            Node::Sin(_) => c.sin += 1,
            Node::Cos(_) => c.cos += 1,
            Node::Sigmoid(_) => c.sigmoid += 1,
            Node::Sech(_) => c.sech += 1,
            Node::Product(_) => c.product += 1,
            _ => {}
        });
        c
    }

    /// Summed over several expressions.
    pub fn of_all(exprs: &[Expression]) -> Self {
        exprs.iter().map(Self::of).fold(Self::default(), |a, b| Self {
            sin: a.sin + b.sin,
            cos: a.cos + b.cos,
            sigmoid: a.sigmoid + b.sigmoid,
            sech: a.sech + b.sech,
            product: a.product + b.product,
        })
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sin={} cos={} sigmoid={} sech={} product={}",
            self.sin, self.cos, self.sigmoid, self.sech, self.product
        )
    }
}
