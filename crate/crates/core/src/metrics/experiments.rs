use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::eval::{config_hash, dataset_hash, evaluate_model_with, EvalReport, RunMeta};
use crate::datasets::{to_supervised, InputLayout, Split, SplitSelection, TaskDataset, TaskKind};
use crate::error::{Error, Result};
use crate::network::{Activation, EqlNetwork, LayerSpec, NetworkSpec};
use crate::par::{self, ExecMode};
use crate::trainer::{train, TrainConfig};

/// Removal set that leaves a sigmoid-only network, the plain-network
/// reference point.
pub const PLAIN_BASELINE: [Activation; 5] = [
    Activation::Identity,
    Activation::Sin,
    Activation::Cos,
    Activation::Product,
    Activation::Sech,
];

/// `{f2}, {f3}, {f4}, {f5}, {f2, f3, f4, f5}`.
pub fn default_removal_sets() -> Vec<Vec<Activation>> {
    use Activation::*;
    vec![vec![Cos], vec![Sigmoid], vec![Product], vec![Sech], vec![Cos, Sigmoid, Product, Sech]]
}

/// `full` for the empty set, otherwise e.g. `no_f2+f5`.
pub fn removal_label(removed: &[Activation]) -> String {
    if removed.is_empty() {
        return "full".to_string();
    }
    let mut idx: Vec<usize> = removed.iter().map(|a| a.index()).collect();
    idx.sort_unstable();
    idx.dedup();
    let parts: Vec<String> = idx.iter().map(|i| format!("f{i}")).collect();
    format!("no_{}", parts.join("+"))
}

/// Architecture and training settings shared by the runs of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub hidden: Vec<LayerSpec>,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    /// Task defaults with the penalty domains taken from the dataset.
    pub fn for_task(kind: TaskKind, ds: &TaskDataset) -> Self {
        let mut train = TrainConfig::for_dataset(ds);
        train.epochs = kind.default_epochs();
        train.batch_size = kind.default_batch_size();
        Self {
            hidden: kind.default_hidden(),
            train,
        }
    }

    pub fn hash(&self) -> String {
        config_hash(&serde_json::to_string(self).expect("config serializes"))
    }
}

struct Outcome {
    net: EqlNetwork,
    report: EvalReport,
    diverged_at: Option<usize>,
}

/// Trains on the training split from the seed's initialization and evaluates
/// every demo. A diverged run is evaluated at its last finite state.
fn train_and_evaluate(
    ds: &TaskDataset,
    hidden: &[LayerSpec],
    cfg: &TrainConfig,
    layout: InputLayout,
    hash: String,
) -> Result<Outcome> {
    let spec = NetworkSpec::new(layout.input_dim(ds.gamma_dim()), hidden.to_vec(), ds.traj_dim())?;
    let data = to_supervised(ds, Split::Training, layout)?;
    let mut cfg = cfg.clone();
    cfg.fill_domains(ds);
    let init = EqlNetwork::init(spec, cfg.seed)?;
    let (net, diverged_at) = match train(init, &data, &cfg) {
        Ok((net, _)) => (net, None),
        Err(Error::Diverged { epoch, snapshot, .. }) => (*snapshot, Some(epoch)),
        Err(e) => return Err(e),
    };
    let meta = RunMeta {
        seed: cfg.seed,
        config_hash: hash,
        dataset_hash: dataset_hash(ds),
    };
    let report = evaluate_model_with(&net, ds, SplitSelection::All, meta)?;
    Ok(Outcome {
        net,
        report,
        diverged_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRun {
    pub label: String,
    pub removed: Vec<Activation>,
    pub training_mse: f64,
    pub extrapolation_mse: f64,
    pub nonzero_params: usize,
    /// Epoch at which training diverged, if it did.
    pub diverged_at: Option<usize>,
}

/// Runs keyed by removal-set label, full-set baseline first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationResult {
    pub runs: Vec<AblationRun>,
}

impl AblationResult {
    pub fn get(&self, label: &str) -> Option<&AblationRun> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn baseline(&self) -> &AblationRun {
        &self.runs[0]
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,training_mse,extrapolation_mse,nonzero_params,diverged_at\n");
        for r in &self.runs {
            let div = r.diverged_at.map(|e| e.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.label, r.training_mse, r.extrapolation_mse, r.nonzero_params, div
            );
        }
        s
    }
}

/// Trains the full network and one network per removal set, all from the
/// same seed, and evaluates both splits. Runs fan out over the rayon pool;
/// results come back in input order.
pub fn run_ablation(
    ds: &TaskDataset,
    base: &ExperimentConfig,
    removal_sets: &[Vec<Activation>],
) -> Result<AblationResult> {
    let layout = InputLayout::TaskParameterized;
    let input_dim = layout.input_dim(ds.gamma_dim());
    let full = NetworkSpec::new(input_dim, base.hidden.clone(), ds.traj_dim())?;
    let mut sets: Vec<Vec<Activation>> = vec![Vec::new()];
    for set in removal_sets {
        full.without(set).map_err(|e| {
            Error::Config(format!("removal set {{{}}} is invalid: {e}", removal_label(set)))
        })?;
        sets.push(set.clone());
    }
    let hash = base.hash();
    let runs = par::map_indices(ExecMode::Parallel, sets.len(), |k| -> Result<AblationRun> {
        let removed = &sets[k];
        let hidden: Vec<LayerSpec> = base.hidden.iter().map(|l| l.without(removed)).collect();
        let out = train_and_evaluate(ds, &hidden, &base.train, layout, hash.clone())?;
        Ok(AblationRun {
            label: removal_label(removed),
            removed: removed.clone(),
            training_mse: out.report.mse(Split::Training),
            extrapolation_mse: out.report.mse(Split::Extrapolation),
            nonzero_params: out.net.nonzero_count(),
            diverged_at: out.diverged_at,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(AblationResult { runs })
}

/// The task-parameterized network and its time-only counterpart trained on
/// the same demonstrations.
#[derive(Debug, Clone)]
pub struct CollapseResult {
    pub tp: EvalReport,
    pub eqln: EvalReport,
    pub tp_net: EqlNetwork,
    pub eqln_net: EqlNetwork,
}

pub fn run_collapse_experiment(ds: &TaskDataset, cfg: &ExperimentConfig) -> Result<CollapseResult> {
    let hash = cfg.hash();
    let layouts = [InputLayout::TaskParameterized, InputLayout::TimeOnly];
    let mut outs = par::map_indices(ExecMode::Parallel, 2, |k| {
        train_and_evaluate(ds, &cfg.hidden, &cfg.train, layouts[k], hash.clone())
    })
    .into_iter();
    let tp = outs.next().expect("two runs")?;
    let eqln = outs.next().expect("two runs")?;
    if let Some(epoch) = tp.diverged_at.or(eqln.diverged_at) {
        return Err(Error::Config(format!("collapse experiment diverged at epoch {epoch}")));
    }
    Ok(CollapseResult {
        tp: tp.report,
        eqln: eqln.report,
        tp_net: tp.net,
        eqln_net: eqln.net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(ds: &TaskDataset) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_task(TaskKind::Phi1, ds);
        c.hidden = vec![LayerSpec::uniform(1)];
        c.train.epochs = 40;
        c.train.batch_size = 64;
        c.train.seed = 3;
        c
    }

    #[test]
    fn labels() {
        assert_eq!(removal_label(&[]), "full");
        assert_eq!(removal_label(&[Activation::Sech, Activation::Cos]), "no_f2+f5");
        assert_eq!(default_removal_sets().len(), 5);
    }

    #[test]
    fn ablation_shape_and_empty_set() {
        let ds = TaskKind::Phi1.generate(0, Some(20)).unwrap();
        let sets = vec![vec![], vec![Activation::Sech]];
        let r = run_ablation(&ds, &quick(&ds), &sets).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.runs[0], r.runs[1]);
        assert_eq!(r.baseline().label, "full");
        assert!(r.get("no_f5").is_some());
        assert_eq!(r.to_csv().lines().count(), 4);
        let only_baseline = run_ablation(&ds, &quick(&ds), &[]).unwrap();
        assert_eq!(only_baseline.len(), 1);
        assert_eq!(only_baseline.runs[0], r.runs[0]);
    }

    #[test]
    fn emptying_removal_set_is_rejected() {
        let ds = TaskKind::Phi1.generate(0, Some(20)).unwrap();
        let all = Activation::ALL.to_vec();
        assert!(matches!(run_ablation(&ds, &quick(&ds), &[all]), Err(Error::Config(_))));
    }

    #[test]
    fn time_only_network_ignores_gamma() {
        let ds = TaskKind::Phi1.generate(0, Some(20)).unwrap();
        let r = run_collapse_experiment(&ds, &quick(&ds)).unwrap();
        assert_eq!(r.eqln_net.input_dim(), 1);
        assert_eq!(r.tp_net.input_dim(), 2);
        assert_eq!(r.tp.meta.dataset_hash, r.eqln.meta.dataset_hash);
        assert_eq!(r.tp.demos.len(), r.eqln.demos.len());
    }
}
