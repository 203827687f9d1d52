use ndarray::Array2;

use super::{Split, TaskDataset};
use crate::error::{Error, Result};

/// Which demonstrations to stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSelection {
    Only(Split),
    All,
}

impl SplitSelection {
    pub fn includes(self, split: Split) -> bool {
        match self {
            SplitSelection::Only(s) => s == split,
            SplitSelection::All => true,
        }
    }
}

impl From<Split> for SplitSelection {
    fn from(s: Split) -> Self {
        SplitSelection::Only(s)
    }
}

/// Network input layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputLayout {
    /// Rows `[γ, t]`.
    #[default]
    TaskParameterized,
    /// Rows `[t]`; the task parameters are not seen by the network.
    TimeOnly,
}

impl InputLayout {
    pub fn input_dim(self, gamma_dim: usize) -> usize {
        match self {
            InputLayout::TaskParameterized => gamma_dim + 1,
            InputLayout::TimeOnly => 1,
        }
    }

    /// Infers the layout from a network input width.
    pub fn for_input_dim(input_dim: usize, gamma_dim: usize) -> Result<Self> {
        if input_dim == gamma_dim + 1 {
            Ok(InputLayout::TaskParameterized)
        } else if input_dim == 1 {
            Ok(InputLayout::TimeOnly)
        } else {
            Err(Error::dim("network input width", gamma_dim + 1, input_dim))
        }
    }
}

/// Stacked `(input, target)` rows ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    /// `(ΣT) × (n + 1)` rows `[γ, t̃]`, with `t̃` the time rescaled to `[0, 1]`.
    pub inputs: Array2<f64>,
    /// `(ΣT) × D` trajectory samples.
    pub targets: Array2<f64>,
    /// `(demo index, sample index)` that produced each row.
    pub origin: Vec<(usize, usize)>,
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Input rows for one demonstration's sample times.
pub(crate) fn demo_inputs(ds: &TaskDataset, demo: usize, layout: InputLayout) -> Array2<f64> {
    let d = &ds.demos[demo];
    let width = layout.input_dim(ds.gamma_dim());
    let mut out = Array2::zeros((d.len(), width));
    for (i, &t) in d.times.iter().enumerate() {
        let mut row = out.row_mut(i);
        if layout == InputLayout::TaskParameterized {
            for (j, &g) in d.gamma.iter().enumerate() {
                row[j] = g;
            }
        }
        row[width - 1] = d.normalized_time(t);
    }
    out
}

pub fn to_supervised(
    ds: &TaskDataset,
    which: impl Into<SplitSelection>,
    layout: InputLayout,
) -> Result<SupervisedSet> {
    let which = which.into();
    let selected: Vec<usize> = (0..ds.demos.len())
        .filter(|&i| which.includes(ds.demos[i].split))
        .collect();
    if selected.is_empty() {
        return Err(Error::Dataset(format!("no demonstrations selected by {which:?}")));
    }
    let width = layout.input_dim(ds.gamma_dim());
    let d = ds.traj_dim();
    let rows: usize = selected.iter().map(|&i| ds.demos[i].len()).sum();
    let mut inputs = Array2::zeros((rows, width));
    let mut targets = Array2::zeros((rows, d));
    let mut origin = Vec::with_capacity(rows);
    let mut r = 0;
    for &i in &selected {
        let block = demo_inputs(ds, i, layout);
        let demo = &ds.demos[i];
        for s in 0..demo.len() {
            inputs.row_mut(r).assign(&block.row(s));
            targets.row_mut(r).assign(&demo.trajectory.row(s));
            origin.push((i, s));
            r += 1;
        }
    }
    Ok(SupervisedSet {
        inputs,
        targets,
        origin,
    })
}
