use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Squared key-point errors between a prediction and its reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KeypointErrors {
    /// Squared difference of the peak heights.
    pub peak_err: f64,
    /// Squared distance between the peaks in the x–z plane.
    pub peak_xz_err: f64,
    /// Squared distance between the final samples.
    pub endpoint_err: f64,
}

fn check(pred: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<()> {
    if pred.dim() != reference.dim() {
        return Err(Error::Dimension {
            context: "trajectory shape",
            expected: reference.nrows() * reference.ncols(),
            got: pred.nrows() * pred.ncols(),
        });
    }
    if pred.nrows() == 0 || pred.ncols() == 0 {
        return Err(Error::Dataset("empty trajectory".into()));
    }
    Ok(())
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean over samples of the squared Euclidean distance.
pub fn trajectory_mse(pred: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<f64> {
    check(pred, reference)?;
    let total: f64 = pred
        .rows()
        .into_iter()
        .zip(reference.rows())
        .map(|(a, b)| sq_dist(a, b))
        .sum();
    Ok(total / pred.nrows() as f64)
}

/// Height coordinate: z for 3-D trajectories, otherwise the last one.
fn height_col(dim: usize) -> usize {
    if dim >= 3 {
        2
    } else {
        dim - 1
    }
}

/// Index of the highest sample; the earliest wins ties.
pub fn peak_index(traj: ArrayView2<'_, f64>) -> Option<usize> {
    if traj.nrows() == 0 || traj.ncols() == 0 {
        return None;
    }
    let col = traj.column(height_col(traj.ncols()));
    let mut best = 0;
    for (i, &v) in col.iter().enumerate() {
        if v > col[best] {
            best = i;
        }
    }
    Some(best)
}

/// Peak and endpoint errors. The peak of each trajectory is located
/// independently.
pub fn keypoint_errors(pred: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<KeypointErrors> {
    check(pred, reference)?;
    let d = pred.ncols();
    let h = height_col(d);
    let pp = pred.row(peak_index(pred).expect("non-empty"));
    let rp = reference.row(peak_index(reference).expect("non-empty"));
    let dz = pp[h] - rp[h];
    let dx = if d > 1 { pp[0] - rp[0] } else { 0.0 };
    let last = pred.nrows() - 1;
    Ok(KeypointErrors {
        peak_err: dz * dz,
        peak_xz_err: dx * dx + dz * dz,
        endpoint_err: sq_dist(pred.row(last), reference.row(last)),
    })
}
