use std::fmt::Write as _;

use super::Phase;

/// Scalars recorded at the end of an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub phase: Phase,
    /// Row-weighted mean of the epoch's mini-batch data losses (measured
    /// before each update).
    pub data_loss: f64,
    /// L1 norm of all parameters after the epoch.
    pub l1: f64,
    /// Weight the L1 term carried during the epoch.
    pub l1_weight: f64,
    /// Bound violation on the epoch's penalty samples after the epoch; zero
    /// on epochs without the penalty.
    pub penalty: f64,
    /// Weight the penalty carried during the epoch.
    pub penalty_weight: f64,
    /// Nonzero parameters after the epoch.
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub wall_time_secs: f64,
    /// First epoch of the lasso phase, if reached.
    pub lasso_start: Option<usize>,
    /// First epoch of the pruning phase, if reached.
    pub prune_start: Option<usize>,
}

impl TrainReport {
    pub fn epochs_run(&self) -> usize {
        self.epochs.len()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    /// CSV with columns `epoch,data_loss,l1,penalty,nnz`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,data_loss,l1,penalty,nnz\n");
        for r in &self.epochs {
            let _ = writeln!(s, "{},{},{},{},{}", r.epoch, r.data_loss, r.l1, r.penalty, r.nnz);
        }
        s
    }
}
