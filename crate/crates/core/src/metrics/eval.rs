use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::trajectory::{keypoint_errors, trajectory_mse};
use crate::datasets::{demo_inputs, InputLayout, Split, SplitSelection, TaskDataset};
use crate::error::{Error, Result};
use crate::network::EqlNetwork;
use crate::par::{self, ExecMode};

/// First 16 hex digits of the SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..16].to_string()
}

/// Hash of a dataset's file representation.
pub fn dataset_hash(ds: &TaskDataset) -> String {
    config_hash(&ds.to_text())
}

/// Run identity attached to a report and embedded in its file names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RunMeta {
    pub seed: u64,
    pub config_hash: String,
    pub dataset_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoMetrics {
    pub demo: usize,
    pub gamma: Vec<f64>,
    pub split: Split,
    pub mse: f64,
    pub peak_err: f64,
    pub peak_xz_err: f64,
    pub endpoint_err: f64,
}

/// Means over the demos of one split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitSummary {
    pub split: Split,
    pub demos: usize,
    pub mse: f64,
    pub peak_err: f64,
    pub peak_xz_err: f64,
    pub endpoint_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task: String,
    pub gamma_dim: usize,
    pub demos: Vec<DemoMetrics>,
    /// One entry per split present, training first.
    pub summaries: Vec<SplitSummary>,
    pub meta: RunMeta,
}

/// Evaluates every demonstration. The input layout follows the network's
/// input width; metadata carries seed 0, the model's hash and the dataset's.
pub fn evaluate_model(net: &EqlNetwork, ds: &TaskDataset) -> Result<EvalReport> {
    let meta = RunMeta {
        seed: 0,
        config_hash: config_hash(&net.to_json()),
        dataset_hash: dataset_hash(ds),
    };
    evaluate_model_with(net, ds, SplitSelection::All, meta)
}

pub fn evaluate_model_with(
    net: &EqlNetwork,
    ds: &TaskDataset,
    which: SplitSelection,
    meta: RunMeta,
) -> Result<EvalReport> {
    let layout = InputLayout::for_input_dim(net.input_dim(), ds.gamma_dim())?;
    if net.output_dim() != ds.traj_dim() {
        return Err(Error::dim("network output width", ds.traj_dim(), net.output_dim()));
    }
    let selected: Vec<usize> = (0..ds.demos.len()).filter(|&i| which.includes(ds.demos[i].split)).collect();
    if selected.is_empty() {
        return Err(Error::Dataset(format!("no demonstrations selected by {which:?}")));
    }
    let demos = par::map_indices(ExecMode::Parallel, selected.len(), |k| -> Result<DemoMetrics> {
        let i = selected[k];
        let demo = &ds.demos[i];
        let inputs = demo_inputs(ds, i, layout);
        let pred = net.forward_batch_with(inputs.view(), ExecMode::Sequential)?;
        let reference = demo.trajectory.view();
        let kp = keypoint_errors(pred.view(), reference)?;
        Ok(DemoMetrics {
            demo: i,
            gamma: demo.gamma.clone(),
            split: demo.split,
            mse: trajectory_mse(pred.view(), reference)?,
            peak_err: kp.peak_err,
            peak_xz_err: kp.peak_xz_err,
            endpoint_err: kp.endpoint_err,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summaries = summarize(&demos);
    Ok(EvalReport {
        task: ds.name.clone(),
        gamma_dim: ds.gamma_dim(),
        demos,
        summaries,
        meta,
    })
}

fn summarize(demos: &[DemoMetrics]) -> Vec<SplitSummary> {
    [Split::Training, Split::Extrapolation]
        .into_iter()
        .filter_map(|split| {
            let members: Vec<&DemoMetrics> = demos.iter().filter(|d| d.split == split).collect();
            if members.is_empty() {
                return None;
            }
            let n = members.len() as f64;
            let mean = |f: fn(&DemoMetrics) -> f64| members.iter().map(|d| f(d)).sum::<f64>() / n;
            Some(SplitSummary {
                split,
                demos: members.len(),
                mse: mean(|d| d.mse),
                peak_err: mean(|d| d.peak_err),
                peak_xz_err: mean(|d| d.peak_xz_err),
                endpoint_err: mean(|d| d.endpoint_err),
            })
        })
        .collect()
}

impl EvalReport {
    pub fn summary(&self, split: Split) -> Option<&SplitSummary> {
        self.summaries.iter().find(|s| s.split == split)
    }

    /// Split-averaged MSE, NaN when the split is absent.
    pub fn mse(&self, split: Split) -> f64 {
        self.summary(split).map_or(f64::NAN, |s| s.mse)
    }

    fn gamma_header(&self) -> Vec<String> {
        match self.gamma_dim {
            1 => vec!["gamma".to_string()],
            n => (1..=n).map(|j| format!("gamma{j}")).collect(),
        }
    }

    /// One row per demo: task, γ…, split, mse, peak_err, peak_xz_err,
    /// endpoint_err.
    pub fn to_demo_csv(&self) -> String {
        self.to_demo_csv_with(true)
    }

    /// Like [`to_demo_csv`](Self::to_demo_csv), optionally without the
    /// key-point columns.
    pub fn to_demo_csv_with(&self, keypoints: bool) -> String {
        let mut s = String::from("task");
        for h in self.gamma_header() {
            s.push(',');
            s.push_str(&h);
        }
        s.push_str(",split,mse");
        s.push_str(if keypoints { ",peak_err,peak_xz_err,endpoint_err\n" } else { "\n" });
        for d in &self.demos {
            s.push_str(&self.task);
            for g in &d.gamma {
                let _ = write!(s, ",{g}");
            }
            let _ = write!(s, ",{},{}", d.split, d.mse);
            if keypoints {
                let _ = write!(s, ",{},{},{}", d.peak_err, d.peak_xz_err, d.endpoint_err);
            }
            s.push('\n');
        }
        s
    }

    /// One row per split present.
    pub fn to_summary_csv(&self) -> String {
        self.to_summary_csv_with(true)
    }

    pub fn to_summary_csv_with(&self, keypoints: bool) -> String {
        let mut s = String::from("task,split,demos,mse");
        s.push_str(if keypoints { ",peak_err,peak_xz_err,endpoint_err\n" } else { "\n" });
        for m in &self.summaries {
            let _ = write!(s, "{},{},{},{}", self.task, m.split, m.demos, m.mse);
            if keypoints {
                let _ = write!(s, ",{},{},{}", m.peak_err, m.peak_xz_err, m.endpoint_err);
            }
            s.push('\n');
        }
        s
    }

    /// `<task>_<config hash>_s<seed>`.
    pub fn file_stem(&self) -> String {
        format!("{}_{}_s{}", self.task, self.meta.config_hash, self.meta.seed)
    }

    /// Writes `eval_<stem>.csv` and `summary_<stem>.csv` into `dir`.
    pub fn write_csvs(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        self.write_csvs_with(dir, true)
    }

    pub fn write_csvs_with(&self, dir: impl AsRef<Path>, keypoints: bool) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = self.file_stem();
        let demo_path = dir.join(format!("eval_{stem}.csv"));
        let summary_path = dir.join(format!("summary_{stem}.csv"));
        fs::write(&demo_path, self.to_demo_csv_with(keypoints)).map_err(|e| Error::io(&demo_path, e))?;
        fs::write(&summary_path, self.to_summary_csv_with(keypoints)).map_err(|e| Error::io(&summary_path, e))?;
        Ok((demo_path, summary_path))
    }
}
