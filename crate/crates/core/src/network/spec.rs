use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};

/// Unit multiplicities of one hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerSpec {
    pub identity: usize,
    pub sin: usize,
    pub cos: usize,
    pub sigmoid: usize,
    pub product: usize,
    pub sech: usize,
}

/// One unit of a layer: its family, the first pre-activation slot it reads
/// and the output slot it writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unit {
    pub kind: Activation,
    pub input: usize,
    pub output: usize,
}

impl LayerSpec {
    /// `k` units of every family.
    pub fn uniform(k: usize) -> Self {
        Self {
            identity: k,
            sin: k,
            cos: k,
            sigmoid: k,
            product: k,
            sech: k,
        }
    }

    pub fn count(&self, kind: Activation) -> usize {
        match kind {
            Activation::Identity => self.identity,
            Activation::Sin => self.sin,
            Activation::Cos => self.cos,
            Activation::Sigmoid => self.sigmoid,
            Activation::Product => self.product,
            Activation::Sech => self.sech,
        }
    }

    pub fn set_count(&mut self, kind: Activation, n: usize) {
        match kind {
            Activation::Identity => self.identity = n,
            Activation::Sin => self.sin = n,
            Activation::Cos => self.cos = n,
            Activation::Sigmoid => self.sigmoid = n,
            Activation::Product => self.product = n,
            Activation::Sech => self.sech = n,
        }
    }

    /// Copy of the layer with every unit of the given families removed.
    pub fn without(&self, removed: &[Activation]) -> Self {
        let mut out = *self;
        for &kind in removed {
            out.set_count(kind, 0);
        }
        out
    }

    /// Pre-activation width `u`.
    pub fn pre_width(&self) -> usize {
        Activation::ALL
            .iter()
            .map(|&k| self.count(k) * if k == Activation::Product { 2 } else { 1 })
            .sum()
    }

    /// Output width `v = u - n_product`.
    pub fn out_width(&self) -> usize {
        Activation::ALL.iter().map(|&k| self.count(k)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.out_width() == 0 {
            return Err(Error::InvalidSpec("hidden layer has no units".into()));
        }
        Ok(())
    }

    /// Units in slot order.
    pub fn units(&self) -> Vec<Unit> {
        let mut units = Vec::with_capacity(self.out_width());
        let (mut input, mut output) = (0, 0);
        for kind in Activation::ALL {
            let span = if kind == Activation::Product { 2 } else { 1 };
            for _ in 0..self.count(kind) {
                units.push(Unit {
                    kind,
                    input,
                    output,
                });
                input += span;
                output += 1;
            }
        }
        units
    }
}

/// Network architecture: input width, hidden layers, output width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    /// Task-parameter dimension plus one time input (or 1 for a time-only
    /// network).
    pub input_dim: usize,
    pub hidden: Vec<LayerSpec>,
    /// Trajectory dimension.
    pub output_dim: usize,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, hidden: Vec<LayerSpec>, output_dim: usize) -> Result<Self> {
        let spec = Self {
            input_dim,
            hidden,
            output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidSpec("input_dim must be positive".into()));
        }
        if self.output_dim == 0 {
            return Err(Error::InvalidSpec("output_dim must be positive".into()));
        }
        if self.hidden.is_empty() {
            return Err(Error::InvalidSpec("at least one hidden layer is required".into()));
        }
        for (i, layer) in self.hidden.iter().enumerate() {
            layer
                .validate()
                .map_err(|_| Error::InvalidSpec(format!("hidden layer {i} has no units")))?;
        }
        Ok(())
    }

    /// `(rows, cols)` of every weight matrix, output layer last.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = self.input_dim;
        for layer in &self.hidden {
            shapes.push((layer.pre_width(), prev));
            prev = layer.out_width();
        }
        shapes.push((self.output_dim, prev));
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * c + r).sum()
    }

    /// Copy with every hidden layer stripped of the given families.
    pub fn without(&self, removed: &[Activation]) -> Result<Self> {
        let spec = Self {
            input_dim: self.input_dim,
            hidden: self.hidden.iter().map(|l| l.without(removed)).collect(),
            output_dim: self.output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }
}
