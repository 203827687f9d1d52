//! Synthetic demonstration families: the two-input toy function, the
//! pick-and-place arcs over a Gaussian obstacle and the box-opening arc.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;

use super::{Demonstration, Split, TaskDataset};
use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::network::sigmoid;
use crate::seed::{self, Stream};

/// Robot workspace box used as output bounds for the pick-and-place tasks.
pub const WORKSPACE_MIN: [f64; 3] = [-0.9, -0.9, -0.1];
pub const WORKSPACE_MAX: [f64; 3] = [0.9, 0.9, 1.2];

fn workspace() -> Vec<Interval> {
    WORKSPACE_MIN
        .iter()
        .zip(WORKSPACE_MAX)
        .map(|(&lo, hi)| Interval::new(lo, hi))
        .collect()
}

/// Ground-truth toy surface `f(t, γ)`.
pub fn toy_function(t: f64, gamma: f64) -> f64 {
    -0.024 * t * t - 0.064 * gamma * gamma + 0.064 * t - 0.112 * gamma * t + 0.256 * gamma
        - 0.5 * (1.2 * t - 0.15 * gamma - 1.8).cos()
        - 0.2 * (-1.4 * gamma - 0.8).sin()
        + 1.3 * sigmoid(1.4 * t + 0.5 * gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub seed: u64,
    pub n_gamma: usize,
    pub samples_per_gamma: usize,
    pub gamma_range: Interval,
    pub t_range: Interval,
    /// Nominal training range; snapped outward-or-inward to the nearest grid
    /// values.
    pub training_range: Interval,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_gamma: 20,
            samples_per_gamma: 200,
            gamma_range: Interval::new(0.0, 3.0),
            t_range: Interval::new(0.0, 10.0),
            training_range: Interval::new(0.789, 2.210),
        }
    }
}

fn snap(grid: &[f64], x: f64) -> f64 {
    grid.iter()
        .copied()
        .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
        .unwrap_or(x)
}

fn snapped(grid: &[f64], nominal: Interval) -> Interval {
    Interval::new(snap(grid, nominal.lo), snap(grid, nominal.hi))
}

/// Toy task: `n_gamma` equally spaced γ values, `samples_per_gamma` uniform
/// random times each, targets from [`toy_function`].
pub fn gen_toy(cfg: &ToyConfig) -> Result<TaskDataset> {
    if cfg.n_gamma == 0 || cfg.samples_per_gamma < 2 {
        return Err(Error::Config("toy task needs at least one γ and two samples".into()));
    }
    let grid = cfg.gamma_range.linspace(cfg.n_gamma);
    let training = snapped(&grid, cfg.training_range);
    let mut demos = Vec::with_capacity(grid.len());
    for (k, &gamma) in grid.iter().enumerate() {
        let mut rng = seed::rng(cfg.seed, Stream::Dataset, k as u64);
        let mut times: Vec<f64> = (0..cfg.samples_per_gamma)
            .map(|_| rng.random_range(cfg.t_range.lo..cfg.t_range.hi))
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        while times.len() < cfg.samples_per_gamma {
            // Duplicate draws are astronomically unlikely; refill if one occurs.
            times.push(rng.random_range(cfg.t_range.lo..cfg.t_range.hi));
            times.sort_by(f64::total_cmp);
            times.dedup();
        }
        let traj = Array2::from_shape_fn((times.len(), 1), |(i, _)| toy_function(times[i], gamma));
        demos.push(Demonstration {
            gamma: vec![gamma],
            times,
            trajectory: traj,
            time_range: cfg.t_range,
            split: if training.contains(gamma) {
                Split::Training
            } else {
                Split::Extrapolation
            },
        });
    }
    let (lo, hi) = demos
        .iter()
        .filter(|d| d.split == Split::Training)
        .flat_map(|d| d.trajectory.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let margin = 0.5 * (hi - lo);
    let ds = TaskDataset {
        name: "toy".into(),
        gamma_domain: vec![cfg.gamma_range],
        training_domain: vec![training],
        output_bounds: vec![Interval::new(lo - margin, hi + margin)],
        demos,
    };
    ds.validate()?;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PickPlaceTask {
    Phi1,
    Phi2,
    Phi3,
}

struct PickPlaceParams {
    name: &'static str,
    /// Feature space and grid size per parameter.
    axes: Vec<(Interval, usize)>,
    /// Nominal training range per parameter.
    training: Vec<Interval>,
    sigma: f64,
}

impl PickPlaceTask {
    fn params(self) -> PickPlaceParams {
        match self {
            PickPlaceTask::Phi1 => PickPlaceParams {
                name: "phi1",
                axes: vec![(Interval::new(0.085, 0.4), 10)],
                training: vec![Interval::new(0.155, 0.33)],
                sigma: 0.21,
            },
            PickPlaceTask::Phi2 => PickPlaceParams {
                name: "phi2",
                axes: vec![
                    (Interval::new(0.085, 0.26), 6),
                    (Interval::new(-0.6, -0.3), 6),
                ],
                training: vec![Interval::new(0.12, 0.225), Interval::new(-0.54, -0.36)],
                sigma: 0.12,
            },
            PickPlaceTask::Phi3 => PickPlaceParams {
                name: "phi3",
                axes: vec![
                    (Interval::new(0.085, 0.365), 5),
                    (Interval::new(-0.6, -0.35), 5),
                    (Interval::new(-0.2, 0.0), 5),
                ],
                training: vec![
                    Interval::new(0.15, 0.29),
                    Interval::new(-0.53, -0.41),
                    Interval::new(-0.15, -0.05),
                ],
                sigma: 0.12,
            },
        }
    }

    /// Native time span for a parameter vector.
    pub fn time_range(self, gamma: &[f64]) -> Interval {
        match self {
            PickPlaceTask::Phi1 => Interval::new(0.0, 1.0),
            _ => Interval::new(0.0, 0.5 - gamma[1]),
        }
    }

    /// Obstacle centre along the path.
    pub fn mu(self, gamma: &[f64]) -> f64 {
        match self {
            PickPlaceTask::Phi3 => 0.5 + gamma[2],
            _ => 0.5,
        }
    }

    pub fn sigma(self) -> f64 {
        self.params().sigma
    }
}

pub(crate) const PICK_START: [f64; 3] = [0.57, -0.41, 0.0];
pub(crate) const PICK_THETA_DEG: f64 = 100.0;

/// Gaussian bump of height parameter `h`.
pub fn gaussian_bump(t: f64, h: f64, mu: f64, sigma: f64) -> f64 {
    h * (2.0 * PI * sigma * sigma).powf(-0.5) * (-(t - mu).powi(2) / (2.0 * sigma * sigma)).exp()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![vec![]], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Pick-and-place arcs: a straight path rotated by 100° from the start point,
/// lifted over a Gaussian obstacle whose height scales with `γ₁`.
pub fn gen_pick_place(task: PickPlaceTask, samples: usize) -> Result<TaskDataset> {
    if samples < 2 {
        return Err(Error::Config("trajectories need at least two samples".into()));
    }
    let p = task.params();
    let grids: Vec<Vec<f64>> = p.axes.iter().map(|(r, n)| r.linspace(*n)).collect();
    let training: Vec<Interval> = grids
        .iter()
        .zip(&p.training)
        .map(|(g, &nominal)| snapped(g, nominal))
        .collect();
    let theta = PICK_THETA_DEG.to_radians();
    let (ct, st) = (theta.cos(), theta.sin());
    let demos = cartesian(&grids)
        .into_iter()
        .map(|gamma| {
            let range = task.time_range(&gamma);
            let times = range.linspace(samples);
            let mu = task.mu(&gamma);
            let traj = Array2::from_shape_fn((samples, 3), |(i, j)| {
                let t = times[i];
                match j {
                    0 => PICK_START[0] + t * ct,
                    1 => PICK_START[1] + t * st,
                    _ => PICK_START[2] + gaussian_bump(t, gamma[0], mu, p.sigma),
                }
            });
            let inside = gamma.iter().zip(&training).all(|(&g, r)| r.contains(g));
            Demonstration {
                gamma,
                times,
                trajectory: traj,
                time_range: range,
                split: if inside { Split::Training } else { Split::Extrapolation },
            }
        })
        .collect();
    let ds = TaskDataset {
        name: p.name.into(),
        gamma_domain: p.axes.iter().map(|(r, _)| *r).collect(),
        training_domain: training,
        output_bounds: workspace(),
        demos,
    };
    ds.validate()?;
    Ok(ds)
}

/// Box-opening arcs in the handle frame: radius `0.15 + γ`, quarter-to-half
/// turn over `t ∈ [0, 400]`.
pub fn gen_open_box(samples: usize) -> Result<TaskDataset> {
    if samples < 2 {
        return Err(Error::Config("trajectories need at least two samples".into()));
    }
    let feature = Interval::new(0.06, 0.6);
    let grid = feature.linspace(10);
    let training = snapped(&grid, Interval::new(0.24, 0.48));
    let range = Interval::new(0.0, 400.0);
    let times = range.linspace(samples);
    let demos = grid
        .iter()
        .map(|&gamma| {
            let r = 0.15 + gamma;
            let traj = Array2::from_shape_fn((samples, 3), |(i, j)| {
                let angle = times[i] * PI / 400.0;
                match j {
                    0 => 0.0,
                    1 => r * (1.0 - angle.cos()),
                    _ => r * angle.sin(),
                }
            });
            Demonstration {
                gamma: vec![gamma],
                times: times.clone(),
                trajectory: traj,
                time_range: range,
                split: if training.contains(gamma) {
                    Split::Training
                } else {
                    Split::Extrapolation
                },
            }
        })
        .collect();
    // The arc reaches y = 2 (0.15 + γ) = 1.5 at the widest box, outside the
    // pick-and-place workspace; widen y so extrapolated arcs are admissible.
    let mut bounds = workspace();
    bounds[1] = Interval::new(-0.9, 1.6);
    let ds = TaskDataset {
        name: "phi4".into(),
        gamma_domain: vec![feature],
        training_domain: vec![training],
        output_bounds: bounds,
        demos,
    };
    ds.validate()?;
    Ok(ds)
}
