use ndarray::{Array2, ArrayView2};

use super::TrainConfig;
use crate::domain::{Interval, Region};
use crate::error::{Error, Result};
use crate::network::{EqlNetwork, Gradient};
use crate::par::ExecMode;
use crate::seed::{self, Stream};

fn check_targets(net: &EqlNetwork, inputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<()> {
    if targets.nrows() != inputs.nrows() {
        return Err(Error::dim("target rows", inputs.nrows(), targets.nrows()));
    }
    if targets.ncols() != net.output_dim() {
        return Err(Error::dim("target width", net.output_dim(), targets.ncols()));
    }
    if inputs.nrows() == 0 {
        return Err(Error::Dataset("empty batch".into()));
    }
    Ok(())
}

/// Batch mean of squared Euclidean errors.
pub fn data_loss(net: &EqlNetwork, inputs: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<f64> {
    check_targets(net, inputs, targets)?;
    let pred = net.forward_batch(inputs)?;
    let sum: f64 = pred
        .rows()
        .into_iter()
        .zip(targets.rows())
        .map(|(p, t)| p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    Ok(sum / inputs.nrows() as f64)
}

/// `Σ_l |W_l|₁ + |b_l|₁` over every layer, output layer included.
pub fn l1_term(net: &EqlNetwork) -> f64 {
    net.params().map(|(v, _)| v.abs()).sum()
}

fn hinge(y: f64, b: &Interval) -> f64 {
    (b.lo - y).max(0.0) + (y - b.hi).max(0.0)
}

fn hinge_slope(y: f64, b: &Interval) -> f64 {
    if y < b.lo {
        -1.0
    } else if y > b.hi {
        1.0
    } else {
        0.0
    }
}

/// Draws the unlabeled penalty inputs for an epoch. Task parameters come
/// from the configured domain minus the excluded box, times uniformly from
/// `penalty_t_range`.
pub fn penalty_inputs(config: &TrainConfig, input_dim: usize, epoch: usize) -> Result<Array2<f64>> {
    if input_dim > 1 && config.penalty_gamma_domain.len() + 1 != input_dim {
        return Err(Error::Config("penalty task-parameter domain is not configured".into()));
    }
    let region = Region {
        outer: if input_dim > 1 { config.penalty_gamma_domain.clone() } else { vec![] },
        excluded: if input_dim > 1 { config.penalty_gamma_exclude.clone() } else { vec![] },
    };
    let mut rng = seed::rng(config.seed, Stream::Penalty, epoch as u64);
    let mut out = Array2::zeros((config.penalty_samples, input_dim));
    for mut row in out.rows_mut() {
        let gamma = region.sample(&mut rng)?;
        for (j, g) in gamma.into_iter().enumerate() {
            row[j] = g;
        }
        row[input_dim - 1] = config.penalty_t_range.sample(&mut rng);
    }
    Ok(out)
}

fn check_bounds(net: &EqlNetwork, bounds: &[Interval]) -> Result<()> {
    if bounds.len() != net.output_dim() {
        return Err(Error::Config(format!(
            "penalty output bounds not configured for {} outputs",
            net.output_dim()
        )));
    }
    Ok(())
}

/// Total bound violation `Σ_samples Σ_dims max(lo − y, 0) + max(y − hi, 0)`.
pub fn penalty_value(net: &EqlNetwork, inputs: ArrayView2<'_, f64>, bounds: &[Interval]) -> Result<f64> {
    check_bounds(net, bounds)?;
    let pred = net.forward_batch(inputs)?;
    Ok(pred
        .rows()
        .into_iter()
        .map(|r| r.iter().zip(bounds).map(|(&y, b)| hinge(y, b)).sum::<f64>())
        .sum())
}

/// `weight · P` and its gradient.
pub fn penalty_value_and_gradient(
    net: &EqlNetwork,
    inputs: ArrayView2<'_, f64>,
    bounds: &[Interval],
    weight: f64,
) -> Result<(f64, Gradient)> {
    check_bounds(net, bounds)?;
    let (p, g) = net.loss_and_gradient(inputs, ExecMode::for_rows(inputs.nrows()), |_, out, d_out| {
        let mut v = 0.0;
        for ((&y, b), d) in out.iter().zip(bounds).zip(d_out.iter_mut()) {
            v += hinge(y, b);
            *d = weight * hinge_slope(y, b);
        }
        v
    })?;
    Ok((weight * p, g))
}

/// Penalty of a network on the inputs drawn for `epoch`.
pub fn penalty_term(net: &EqlNetwork, config: &TrainConfig, epoch: usize) -> Result<f64> {
    config.validate_penalty_dims(net.input_dim(), net.output_dim())?;
    let inputs = penalty_inputs(config, net.input_dim(), epoch)?;
    penalty_value(net, inputs.view(), &config.output_bounds)
}

/// Penalty samples and weight for one objective evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyBatch<'a> {
    pub inputs: ArrayView2<'a, f64>,
    pub bounds: &'a [Interval],
    pub weight: f64,
}

/// Which regularizers enter the objective.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossTerms<'a> {
    pub lambda_wb: f64,
    pub penalty: Option<PenaltyBatch<'a>>,
}

/// Objective value split by term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveValue {
    pub total: f64,
    pub data: f64,
    /// Raw L1 norm (unweighted).
    pub l1: f64,
    /// Raw bound violation (unweighted); zero when the penalty is off.
    pub penalty: f64,
}

/// Mini-batch objective and its (sub)gradient. The L1 subgradient at zero is
/// zero.
pub fn objective(
    net: &EqlNetwork,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
    terms: &LossTerms<'_>,
) -> Result<(ObjectiveValue, Gradient)> {
    check_targets(net, inputs, targets)?;
    let scale = 1.0 / inputs.nrows() as f64;
    let (sq, mut grad) = net.loss_and_gradient(inputs, ExecMode::for_rows(inputs.nrows()), |r, out, d_out| {
        let mut s = 0.0;
        for ((&y, &t), d) in out.iter().zip(targets.row(r)).zip(d_out.iter_mut()) {
            let e = y - t;
            s += e * e;
            *d = 2.0 * e * scale;
        }
        s
    })?;
    let data = sq * scale;
    let mut value = ObjectiveValue {
        total: data,
        data,
        l1: l1_term(net),
        penalty: 0.0,
    };
    if terms.lambda_wb > 0.0 {
        value.total += terms.lambda_wb * value.l1;
        for (g, (v, masked)) in grad.values_mut().zip(net.params()) {
            if !masked && v != 0.0 {
                *g += terms.lambda_wb * v.signum();
            }
        }
    }
    if let Some(p) = terms.penalty {
        if p.weight > 0.0 {
            let (weighted, pg) = penalty_value_and_gradient(net, p.inputs, p.bounds, p.weight)?;
            value.penalty = weighted / p.weight;
            value.total += weighted;
            grad.add_assign(&pg);
        }
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{LayerSpec, NetworkSpec};
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};

    fn constant_net(output_dim: usize, value: &[f64]) -> EqlNetwork {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], output_dim).unwrap();
        let mut net = EqlNetwork::zeros(spec).unwrap();
        for (b, &v) in net.layers_mut()[1].bias.iter_mut().zip(value) {
            *b = v;
        }
        net
    }

    fn random_net(seed: u64) -> EqlNetwork {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1); 2], 2).unwrap();
        let mut net = EqlNetwork::init(spec, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for (v, _) in net.params_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        net
    }

    fn penalty_config() -> TrainConfig {
        TrainConfig {
            output_bounds: vec![Interval::new(-0.9, 0.9), Interval::new(-0.1, 1.2)],
            penalty_gamma_domain: vec![Interval::new(0.0, 3.0)],
            penalty_gamma_exclude: vec![Interval::new(0.8, 2.2)],
            penalty_samples: 10,
            ..Default::default()
        }
    }

    #[test]
    fn perfect_fit_has_zero_data_loss() {
        let net = random_net(1);
        let x = array![[0.1, 0.2], [1.0, -0.5]];
        let y = net.forward_batch(x.view()).unwrap();
        assert_eq!(data_loss(&net, x.view(), y.view()).unwrap(), 0.0);
    }

    #[test]
    fn unit_error() {
        let spec = NetworkSpec::new(1, vec![LayerSpec { identity: 1, ..Default::default() }], 1).unwrap();
        let mut net = EqlNetwork::zeros(spec).unwrap();
        net.layers_mut()[1].bias[0] = 1.0;
        assert_eq!(data_loss(&net, array![[0.0]].view(), array![[0.0]].view()).unwrap(), 1.0);
    }

    #[test]
    fn data_loss_matches_loop() {
        let net = random_net(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((37, 2), |_| rng.random_range(-2.0..2.0));
        let y = Array2::from_shape_fn((37, 2), |_| rng.random_range(-2.0..2.0));
        let mut acc = 0.0;
        for i in 0..37 {
            let p = net.forward(&x.row(i).to_vec()).unwrap();
            acc += (p[0] - y[[i, 0]]).powi(2) + (p[1] - y[[i, 1]]).powi(2);
        }
        let got = data_loss(&net, x.view(), y.view()).unwrap();
        assert!((got - acc / 37.0).abs() < 1e-12);
    }

    #[test]
    fn l1_examples() {
        let mut net = constant_net(1, &[0.0]);
        assert_eq!(l1_term(&net), 0.0);
        net.layers_mut()[0].weights[[2, 1]] = 0.5;
        net.layers_mut()[1].bias[0] = -0.25;
        assert_eq!(l1_term(&net), 0.75);
        let r = random_net(4);
        let manual: f64 = r
            .layers()
            .iter()
            .map(|l| l.weights.iter().map(|v| v.abs()).sum::<f64>() + l.bias.iter().map(|v| v.abs()).sum::<f64>())
            .sum();
        assert!((l1_term(&r) - manual).abs() < 1e-12);
    }

    #[test]
    fn penalty_zero_inside_bounds() {
        let net = constant_net(2, &[0.0, 0.5]);
        let cfg = penalty_config();
        assert_eq!(penalty_term(&net, &cfg, 50).unwrap(), 0.0);
    }

    #[test]
    fn penalty_overshoot_exact() {
        let cfg = penalty_config();
        let net = constant_net(2, &[0.0, 1.2 + 0.1]);
        let p = penalty_term(&net, &cfg, 50).unwrap();
        assert!((p - 1.0).abs() < 1e-12, "{p}");
    }

    #[test]
    fn penalty_samples_avoid_training_box() {
        let cfg = penalty_config();
        let x = penalty_inputs(&cfg, 2, 7).unwrap();
        assert_eq!(x.nrows(), 10);
        for r in x.rows() {
            assert!(r[0] < 0.8 || r[0] > 2.2);
            assert!((0.0..1.0).contains(&r[1]));
        }
        assert_eq!(x, penalty_inputs(&cfg, 2, 7).unwrap());
        assert_ne!(x, penalty_inputs(&cfg, 2, 8).unwrap());
    }

    #[test]
    fn penalty_matches_loop() {
        let cfg = TrainConfig {
            penalty_samples: 64,
            ..penalty_config()
        };
        let net = random_net(5);
        let x = penalty_inputs(&cfg, 2, 100).unwrap();
        let mut acc = 0.0;
        for r in x.rows() {
            let y = net.forward(&r.to_vec()).unwrap();
            for (v, b) in y.iter().zip(&cfg.output_bounds) {
                acc += (b.lo - v).max(0.0) + (v - b.hi).max(0.0);
            }
        }
        let got = penalty_term(&net, &cfg, 100).unwrap();
        assert!((got - acc).abs() < 1e-12);
    }

    #[test]
    fn penalty_requires_domains() {
        let net = constant_net(2, &[0.0, 0.0]);
        assert!(penalty_term(&net, &TrainConfig::default(), 50).is_err());
    }
}
