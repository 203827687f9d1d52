use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;

use super::loss::{objective, penalty_inputs, penalty_value, LossTerms, PenaltyBatch};
use super::{adam_step, AdamState, EpochRecord, Phase, TrainConfig, TrainReport};
use crate::datasets::SupervisedSet;
use crate::error::{Error, Result};
use crate::network::EqlNetwork;
use crate::seed::{self, Stream};

/// Trains with shuffled mini-batch Adam over the three phases.
pub fn train(net: EqlNetwork, data: &SupervisedSet, config: &TrainConfig) -> Result<(EqlNetwork, TrainReport)> {
    train_observed(net, data, config, |_, _| {})
}

/// Like [`train`], calling `observer` after every epoch with the epoch's
/// record and the network as it stands.
pub fn train_observed<F>(
    mut net: EqlNetwork,
    data: &SupervisedSet,
    config: &TrainConfig,
    mut observer: F,
) -> Result<(EqlNetwork, TrainReport)>
where
    F: FnMut(&EpochRecord, &EqlNetwork),
{
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Dataset("training set is empty".into()));
    }
    if data.inputs.ncols() != net.input_dim() {
        return Err(Error::dim("training input width", net.input_dim(), data.inputs.ncols()));
    }
    if data.targets.ncols() != net.output_dim() || data.targets.nrows() != data.len() {
        return Err(Error::dim("training target width", net.output_dim(), data.targets.ncols()));
    }
    if config.penalty_enabled() {
        config.validate_penalty_dims(net.input_dim(), net.output_dim())?;
    }

    let started = Instant::now();
    let rows = data.len();
    let in_w = net.input_dim();
    let out_w = net.output_dim();
    let mut order: Vec<usize> = (0..rows).collect();
    let mut shuffle = seed::rng(config.seed, Stream::Shuffle, 0);
    let mut state = AdamState::new(&net);
    let mut report = TrainReport::default();
    let mut last_finite = net.clone();

    for epoch in 1..=config.epochs {
        let phase = config.phase(epoch);
        match phase {
            Phase::Lasso if report.lasso_start.is_none() => report.lasso_start = Some(epoch),
            Phase::Prune if report.prune_start.is_none() => report.prune_start = Some(epoch),
            _ => {}
        }
        let lambda_wb = config.lambda_wb_at(epoch);
        let pen_inputs = if config.penalty_active(epoch) {
            Some(penalty_inputs(config, in_w, epoch)?)
        } else {
            None
        };
        let terms = LossTerms {
            lambda_wb,
            penalty: pen_inputs.as_ref().map(|x| PenaltyBatch {
                inputs: x.view(),
                bounds: &config.output_bounds,
                weight: config.lambda_p,
            }),
        };
        if phase == Phase::Prune {
            net.prune_below(config.prune_threshold);
        }

        order.shuffle(&mut shuffle);
        let mut data_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut x = Array2::zeros((batch.len(), in_w));
            let mut y = Array2::zeros((batch.len(), out_w));
            for (k, &r) in batch.iter().enumerate() {
                x.row_mut(k).assign(&data.inputs.row(r));
                y.row_mut(k).assign(&data.targets.row(r));
            }
            let (value, grad) = objective(&net, x.view(), y.view(), &terms)?;
            if !value.total.is_finite() || grad.values().any(|g| !g.is_finite()) {
                return Err(diverged(epoch, last_finite, report, started));
            }
            data_sum += value.data * batch.len() as f64;
            adam_step(
                &mut net,
                &grad,
                &mut state,
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.epsilon,
            )?;
            if phase == Phase::Prune {
                net.prune_below(config.prune_threshold);
            }
        }
        if !net.is_finite() {
            return Err(diverged(epoch, last_finite, report, started));
        }

        let penalty = match &pen_inputs {
            Some(x) => penalty_value(&net, x.view(), &config.output_bounds)?,
            None => 0.0,
        };
        let record = EpochRecord {
            epoch,
            phase,
            data_loss: data_sum / rows as f64,
            l1: super::l1_term(&net),
            l1_weight: lambda_wb,
            penalty,
            penalty_weight: if pen_inputs.is_some() { config.lambda_p } else { 0.0 },
            nnz: net.nonzero_count(),
        };
        if !record.data_loss.is_finite() {
            return Err(diverged(epoch, last_finite, report, started));
        }
        observer(&record, &net);
        report.epochs.push(record);
        last_finite.clone_from(&net);
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((net, report))
}

fn diverged(epoch: usize, snapshot: EqlNetwork, mut report: TrainReport, started: Instant) -> Error {
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Error::Diverged {
        epoch,
        snapshot: Box::new(snapshot),
        report: Box::new(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{to_supervised, InputLayout, SplitSelection, TaskKind};
    use crate::network::{LayerSpec, NetworkSpec};
    use ndarray::array;

    fn one_point() -> SupervisedSet {
        SupervisedSet {
            inputs: array![[0.5, 0.2]],
            targets: array![[0.8]],
            origin: vec![(0, 0)],
        }
    }

    fn plain(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            lambda_wb: 0.0,
            lambda_p: 0.0,
            prune_threshold: 0.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn loss_decreases_on_a_linear_fit() {
        let spec = NetworkSpec::new(2, vec![LayerSpec { identity: 1, ..Default::default() }], 1).unwrap();
        let net = EqlNetwork::init(spec, 1).unwrap();
        let (_, report) = train(net, &one_point(), &plain(300)).unwrap();
        let first = report.epochs[0].data_loss;
        let last = report.last().unwrap().data_loss;
        assert!(last < 1e-3 * first, "{first} -> {last}");
    }

    #[test]
    fn small_parameter_is_pruned_and_stays_zero() {
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 1).unwrap();
        let mut net = EqlNetwork::init(spec, 2).unwrap();
        net.layers_mut()[1].weights[[0, 2]] = 0.005;
        let cfg = TrainConfig {
            epochs: 8,
            learning_rate: 1e-6,
            ..plain(8)
        };
        let cfg = TrainConfig { prune_threshold: 0.01, ..cfg };
        let mut seen = Vec::new();
        let (net, report) = train_observed(net, &one_point(), &cfg, |r, n| {
            seen.push((r.phase, n.layers()[1].weights[[0, 2]]));
        })
        .unwrap();
        assert_eq!(report.prune_start, Some(7));
        assert!(seen[..6].iter().all(|&(_, w)| w != 0.0));
        assert!(seen[6..].iter().all(|&(p, w)| p == Phase::Prune && w == 0.0));
        assert!(net.layers()[1].weight_mask[[0, 2]]);
    }

    #[test]
    fn reruns_are_identical() {
        let ds = TaskKind::Phi1.generate(0, Some(20)).unwrap();
        let data = to_supervised(&ds, SplitSelection::All, InputLayout::TaskParameterized).unwrap();
        let mut cfg = TrainConfig::for_dataset(&ds);
        cfg.epochs = 100;
        cfg.batch_size = 32;
        cfg.seed = 9;
        let spec = NetworkSpec::new(2, vec![LayerSpec::uniform(1)], 3).unwrap();
        let run = || train(EqlNetwork::init(spec.clone(), 9).unwrap(), &data, &cfg).unwrap();
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(ra.to_csv(), rb.to_csv());
        assert!(ra.epochs.iter().all(|r| (r.penalty_weight > 0.0) == (r.epoch % 50 == 0)));
    }

    #[test]
    fn divergence_returns_last_finite_snapshot() {
        let spec = NetworkSpec::new(2, vec![LayerSpec { sin: 1, ..Default::default() }], 1).unwrap();
        let net = EqlNetwork::init(spec, 3).unwrap();
        let data = SupervisedSet {
            inputs: array![[0.5, f64::NAN]],
            targets: array![[1.0]],
            origin: vec![(0, 0)],
        };
        match train(net.clone(), &data, &plain(5)) {
            Err(Error::Diverged { epoch, snapshot, .. }) => {
                assert_eq!(epoch, 1);
                assert_eq!(*snapshot, net);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_data_is_rejected() {
        let spec = NetworkSpec::new(3, vec![LayerSpec::uniform(1)], 1).unwrap();
        let net = EqlNetwork::init(spec, 0).unwrap();
        assert!(train(net, &one_point(), &plain(2)).is_err());
    }
}
