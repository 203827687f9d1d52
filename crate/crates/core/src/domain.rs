//! Intervals and boxes over task-parameter and output spaces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Slack for membership tests on generated grids, whose points carry
/// accumulated rounding.
pub const GRID_TOLERANCE: f64 = 1e-9;

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - GRID_TOLERANCE && x <= self.hi + GRID_TOLERANCE
    }

    pub fn is_proper(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }

    /// `n` equally spaced points from `lo` to `hi`, both included.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![self.lo],
            _ => {
                let step = self.width() / (n - 1) as f64;
                (0..n)
                    .map(|i| if i == n - 1 { self.hi } else { self.lo + step * i as f64 })
                    .collect()
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..self.hi)
        }
    }
}

pub fn box_contains(bounds: &[Interval], point: &[f64]) -> bool {
    bounds.len() == point.len() && bounds.iter().zip(point).all(|(b, &x)| b.contains(x))
}

pub fn validate_box(name: &str, bounds: &[Interval]) -> Result<()> {
    for (i, b) in bounds.iter().enumerate() {
        if !b.is_proper() {
            return Err(Error::Config(format!(
                "{name}[{i}] must satisfy min < max, got [{}, {}]",
                b.lo, b.hi
            )));
        }
    }
    Ok(())
}

/// An outer box with an optional inner box cut out: the extrapolation part
/// of a task-parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub outer: Vec<Interval>,
    /// Empty means nothing is excluded.
    pub excluded: Vec<Interval>,
}

const MAX_REJECTIONS: usize = 100_000;

impl Region {
    pub fn contains(&self, point: &[f64]) -> bool {
        box_contains(&self.outer, point)
            && (self.excluded.is_empty() || !box_contains(&self.excluded, point))
    }

    /// Uniform sample from the region by rejection.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        for _ in 0..MAX_REJECTIONS {
            let p: Vec<f64> = self.outer.iter().map(|i| i.sample(rng)).collect();
            if self.excluded.is_empty() || !box_contains(&self.excluded, &p) {
                return Ok(p);
            }
        }
        Err(Error::Config(
            "extrapolation region is empty: excluded box covers the outer box".into(),
        ))
    }
}
