//! Subcommand implementations. Each resolves its configuration fully, writes
//! the snapshot, then does the work.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use tp_eqln::datasets::{save_dataset, to_supervised, InputLayout, Split, SplitSelection, TaskDataset, TaskKind};
use tp_eqln::metrics::{
    config_hash, dataset_hash, default_removal_sets, evaluate_model_with, run_ablation, ExperimentConfig, RunMeta,
};
use tp_eqln::network::{load_model, save_model};
use tp_eqln::par;
use tp_eqln::symbolic::{extract, save_expressions, simplify_with, Census, Expression, SimplifyOptions};
use tp_eqln::trainer::{train_observed, Phase, TrainConfig};
use tp_eqln::{EqlNetwork, Error, LayerSpec, NetworkSpec, Result};

use crate::config::{
    load_section, parse_removal_set, resolve_hidden, resolve_out_dir, resolve_train, AblateSection, DatasetSection,
    EvalSection, ExtractSection, NetworkSection, Resolved, RunConfig,
};

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Output directory [default: $TP_EQLN_OUT, else ./runs].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => RunConfig::load(p),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Synthetic task to generate (toy, phi1..phi4).
    #[arg(long, conflicts_with = "data")]
    pub task: Option<String>,
    /// Dataset file to load.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Generator seed for --task.
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Samples per trajectory (per γ for the toy).
    #[arg(long)]
    pub samples: Option<usize>,
}

impl DataArgs {
    fn apply(&self, ds: &mut DatasetSection) {
        if let Some(t) = &self.task {
            ds.task = Some(t.clone());
            ds.path = None;
        }
        if let Some(p) = &self.data {
            ds.path = Some(p.clone());
            ds.task = None;
        }
        if let Some(s) = self.data_seed {
            ds.seed = s;
        }
        if self.samples.is_some() {
            ds.samples = self.samples;
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct NetArgs {
    /// Hidden layer count; every layer gets --units units per family.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Units per family in each hidden layer.
    #[arg(long)]
    pub units: Option<usize>,
}

impl NetArgs {
    fn apply(&self, hidden: &mut Vec<LayerSpec>) {
        if self.layers.is_none() && self.units.is_none() {
            return;
        }
        let layers = self.layers.unwrap_or(hidden.len());
        let units = self.units.unwrap_or_else(|| hidden.first().map_or(1, |l| l.identity.max(1)));
        *hidden = vec![LayerSpec::uniform(units); layers];
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Initialization and shuffling seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L1 weight during the lasso phase.
    #[arg(long)]
    pub lambda_wb: Option<f64>,
    /// Extrapolation penalty weight.
    #[arg(long)]
    pub lambda_p: Option<f64>,
    /// Magnitude pruning threshold.
    #[arg(long)]
    pub prune_threshold: Option<f64>,
}

impl TrainArgs {
    fn apply(&self, cfg: &mut TrainConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(seed, epochs, batch_size, learning_rate, lambda_wb, lambda_p, prune_threshold);
    }
}

/// Everything a command needs after resolution.
struct Setup {
    resolved: Resolved,
    data: Option<(TaskDataset, Option<TaskKind>)>,
}

fn setup(
    common: &CommonArgs,
    data: Option<&DataArgs>,
    edit: impl FnOnce(&mut RunConfig),
) -> Result<Setup> {
    let mut file = common.load()?;
    if let Some(d) = data {
        d.apply(&mut file.dataset);
    }
    edit(&mut file);
    let loaded = match data {
        Some(_) => Some(load_section(&file.dataset)?),
        None => None,
    };
    let (train, hidden) = match &loaded {
        Some((ds, kind)) => (resolve_train(&file.train, ds, *kind)?, resolve_hidden(&file.network, *kind)),
        None => (TrainConfig::default(), resolve_hidden(&file.network, None)),
    };
    let resolved = Resolved {
        out_dir: resolve_out_dir(common.out_dir.clone(), file.out_dir.clone()),
        model: file.model.clone(),
        dataset: file.dataset.clone(),
        network: NetworkSection { hidden: Some(hidden) },
        train,
        eval: file.eval.clone(),
        extract: file.extract.clone(),
        ablate: file.ablate.clone(),
    };
    Ok(Setup { resolved, data: loaded })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- gen-data

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Task to generate (toy, phi1..phi4).
    #[arg(long)]
    pub task: Option<String>,
    /// Generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Dataset file to write [default: <out-dir>/<task>.ds].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn dataset_summary(ds: &TaskDataset) -> String {
    let fmt_box = |b: &[tp_eqln::domain::Interval]| {
        b.iter().map(|i| format!("[{}, {}]", i.lo, i.hi)).collect::<Vec<_>>().join(" x ")
    };
    let mut s = String::new();
    let _ = writeln!(s, "task {}", ds.name);
    let _ = writeln!(
        s,
        "demos {} (training {}, extrapolation {})",
        ds.demos.len(),
        ds.count(Split::Training),
        ds.count(Split::Extrapolation)
    );
    let _ = writeln!(s, "samples per demo {}", ds.samples_per_demo());
    let _ = writeln!(s, "gamma dim {}, trajectory dim {}", ds.gamma_dim(), ds.traj_dim());
    let _ = writeln!(s, "gamma domain {}", fmt_box(&ds.gamma_domain));
    let _ = writeln!(s, "training domain {}", fmt_box(&ds.training_domain));
    let _ = writeln!(s, "output bounds {}", fmt_box(&ds.output_bounds));
    let _ = writeln!(s, "dataset hash {}", dataset_hash(ds));
    s
}

pub fn gen_data(args: &GenDataArgs) -> Result<()> {
    let data = DataArgs {
        task: args.task.clone(),
        data: None,
        data_seed: args.seed,
        samples: args.samples,
    };
    // gen-data only generates; a dataset path in the config is ignored.
    let Setup { resolved, data } = setup(&args.common, Some(&data), |f| f.dataset.path = None)?;
    let (ds, _) = data.expect("dataset requested");
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| resolved.out_dir.join(format!("{}.ds", ds.name)));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_dataset(&ds, &out)?;
    let summary = dataset_summary(&ds);
    let mut summary_path = out.clone().into_os_string();
    summary_path.push(".summary.txt");
    write_file(Path::new(&summary_path), &summary)?;
    let snap_dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let snap = Resolved {
        out_dir: snap_dir.to_path_buf(),
        ..resolved
    };
    snap.write_snapshot("gen-data")?;
    print!("{summary}");
    println!("wrote {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone, Args)]
pub struct TrainCmdArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Train on time alone, without the task parameters.
    #[arg(long)]
    pub time_only: bool,
    /// Print losses every N epochs (0: phase changes only).
    #[arg(long, default_value_t = 0)]
    pub log_every: usize,
}

pub fn train_cmd(args: &TrainCmdArgs) -> Result<()> {
    let Setup { mut resolved, data } = setup(&args.common, Some(&args.data), |_| {})?;
    let (ds, _) = data.expect("dataset requested");
    let mut hidden = resolved.network.hidden.clone().unwrap_or_default();
    args.net.apply(&mut hidden);
    resolved.network.hidden = Some(hidden.clone());
    args.train.apply(&mut resolved.train);
    let cfg = resolved.train.clone();
    cfg.validate()?;
    let layout = if args.time_only {
        InputLayout::TimeOnly
    } else {
        InputLayout::TaskParameterized
    };
    let spec = NetworkSpec::new(layout.input_dim(ds.gamma_dim()), hidden, ds.traj_dim())?;
    cfg.validate_penalty_dims(spec.input_dim, spec.output_dim)?;
    let set = to_supervised(&ds, Split::Training, layout)?;
    resolved.write_snapshot("train")?;

    let net = EqlNetwork::init(spec, cfg.seed)?;
    println!(
        "training {} on {} samples: {} parameters, {} epochs, batch {}",
        ds.name,
        set.len(),
        net.param_count(),
        cfg.epochs,
        cfg.batch_size
    );
    let mut phase = None;
    let log_every = args.log_every;
    let outcome = train_observed(net, &set, &cfg, |rec, net| {
        if phase != Some(rec.phase) {
            phase = Some(rec.phase);
            let name = match rec.phase {
                Phase::Free => "free fit",
                Phase::Lasso => "lasso",
                Phase::Prune => "pruning",
            };
            println!("epoch {:>6}: phase {name} (nonzero {})", rec.epoch, net.nonzero_count());
        }
        if log_every > 0 && rec.epoch % log_every == 0 {
            println!(
                "epoch {:>6}: data {:.6e} l1 {:.6e} penalty {:.6e} nonzero {}",
                rec.epoch, rec.data_loss, rec.l1, rec.penalty, rec.nnz
            );
        }
    });
    let model_path = resolved.out_dir.join("model.json");
    let report_path = resolved.out_dir.join("train_report.csv");
    match outcome {
        Ok((net, report)) => {
            save_model(&net, &model_path)?;
            write_file(&report_path, &report.to_csv())?;
            let last = report.last().expect("at least one epoch");
            println!("final data loss {:.6e}", last.data_loss);
            println!("nonzero parameters {} of {}", net.nonzero_count(), net.param_count());
            println!("wrote {}", model_path.display());
            Ok(())
        }
        Err(Error::Diverged { epoch, snapshot, report }) => {
            let path = resolved.out_dir.join("model.diverged.json");
            save_model(&snapshot, &path)?;
            write_file(&report_path, &report.to_csv())?;
            eprintln!("last finite parameters written to {}", path.display());
            Err(Error::Diverged { epoch, snapshot, report })
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------- extract

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Simplify the extracted expressions.
    #[arg(long)]
    pub simplify: bool,
    /// Coefficients below this magnitude are dropped when simplifying.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Rewrite cosines as phase-shifted sines.
    #[arg(long)]
    pub phase_normalize: bool,
    /// Expression text file [default: <out-dir>/expressions.txt].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn require_model(model: &Option<PathBuf>) -> Result<PathBuf> {
    let path = model
        .clone()
        .ok_or_else(|| Error::Config("a model file is required (--model or `model` in the config)".into()))?;
    if !path.exists() {
        return Err(Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "model file not found"),
        ));
    }
    Ok(path)
}

pub fn expressions_text(exprs: &[Expression], census: &Census) -> String {
    let mut s = String::new();
    for (i, e) in exprs.iter().enumerate() {
        let _ = writeln!(s, "# y{} nodes {}", i + 1, e.node_count());
        let _ = writeln!(s, "y{} = {}", i + 1, e);
    }
    let _ = writeln!(s, "# census {census}");
    s
}

pub fn extract_cmd(args: &ExtractArgs) -> Result<()> {
    let Setup { resolved, .. } = setup(&args.common, None, |f| {
        if args.model.is_some() {
            f.model = args.model.clone();
        }
        let x: &mut ExtractSection = &mut f.extract;
        x.simplify |= args.simplify;
        x.phase_normalize |= args.phase_normalize;
        if let Some(e) = args.eps {
            x.eps = e;
        }
    })?;
    let opts = &resolved.extract;
    if !(opts.eps >= 0.0 && opts.eps.is_finite()) {
        return Err(Error::Config(format!("eps must be a finite non-negative number, got {}", opts.eps)));
    }
    let model_path = require_model(&resolved.model)?;
    let net = load_model(&model_path)?;
    let mut exprs = extract(&net);
    if opts.simplify || opts.phase_normalize {
        let so = SimplifyOptions {
            coef_epsilon: if opts.simplify { opts.eps } else { 0.0 },
            normalize_phase: opts.phase_normalize,
        };
        exprs = exprs.iter().map(|e| simplify_with(e, &so)).collect();
    }
    let census = Census::of_all(&exprs);
    let text = expressions_text(&exprs, &census);
    let out = args.out.clone().unwrap_or_else(|| resolved.out_dir.join("expressions.txt"));
    write_file(&out, &text)?;
    save_expressions(&exprs, out.with_extension("json"))?;
    let snap_dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    Resolved {
        out_dir: snap_dir.to_path_buf(),
        ..resolved
    }
    .write_snapshot("extract")?;
    print!("{text}");
    Ok(())
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Splits to evaluate (comma list of training, extrapolation).
    #[arg(long, value_delimiter = ',')]
    pub splits: Option<Vec<String>>,
    /// Leave the key-point error columns out.
    #[arg(long)]
    pub no_keypoints: bool,
    /// Seed recorded in the report and file names.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn selection(splits: &[Split]) -> Result<SplitSelection> {
    let has = |s| splits.contains(&s);
    match (has(Split::Training), has(Split::Extrapolation)) {
        (true, true) => Ok(SplitSelection::All),
        (true, false) => Ok(SplitSelection::Only(Split::Training)),
        (false, true) => Ok(SplitSelection::Only(Split::Extrapolation)),
        (false, false) => Err(Error::Config("eval: at least one split is required".into())),
    }
}

pub fn eval_cmd(args: &EvalArgs) -> Result<()> {
    let splits = args
        .splits
        .as_ref()
        .map(|v| v.iter().map(|s| s.trim().parse::<Split>()).collect::<Result<Vec<_>>>())
        .transpose()?;
    let Setup { mut resolved, data } = setup(&args.common, Some(&args.data), |f| {
        if args.model.is_some() {
            f.model = args.model.clone();
        }
        let e: &mut EvalSection = &mut f.eval;
        if let Some(s) = splits {
            e.splits = s;
        }
        if args.no_keypoints {
            e.keypoints = false;
        }
    })?;
    if let Some(s) = args.seed {
        resolved.train.seed = s;
    }
    let which = selection(&resolved.eval.splits)?;
    let (ds, _) = data.expect("dataset requested");
    let model_path = require_model(&resolved.model)?;
    let net = load_model(&model_path)?;
    let eval_toml = toml::to_string(&resolved.eval).expect("eval section serializes");
    let meta = RunMeta {
        seed: resolved.train.seed,
        config_hash: config_hash(&format!("{eval_toml}\n{}", net.to_json())),
        dataset_hash: dataset_hash(&ds),
    };
    let report = evaluate_model_with(&net, &ds, which, meta)?;
    resolved.write_snapshot("eval")?;
    let (demo_csv, summary_csv) = report.write_csvs_with(&resolved.out_dir, resolved.eval.keypoints)?;
    print!("{}", report.to_summary_csv_with(resolved.eval.keypoints));
    println!("wrote {} and {}", demo_csv.display(), summary_csv.display());
    Ok(())
}

// ---------------------------------------------------------------- ablate

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    /// A removal set as a comma list (f2,f3 or sin,cos); repeat for more
    /// runs. Replaces the default sets.
    #[arg(long)]
    pub remove: Vec<String>,
    /// Run the full network alone.
    #[arg(long, conflicts_with = "remove")]
    pub baseline_only: bool,
    /// Concurrent training runs (0: one per core).
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn ablate_cmd(args: &AblateArgs) -> Result<()> {
    let Setup { mut resolved, data } = setup(&args.common, Some(&args.data), |f| {
        let a: &mut AblateSection = &mut f.ablate;
        if args.baseline_only {
            a.removal_sets = Some(Vec::new());
        } else if !args.remove.is_empty() {
            a.removal_sets = Some(args.remove.iter().map(|r| vec![r.clone()]).collect());
        }
        if let Some(j) = args.jobs {
            a.jobs = j;
        }
    })?;
    let (ds, _) = data.expect("dataset requested");
    let mut hidden = resolved.network.hidden.clone().unwrap_or_default();
    args.net.apply(&mut hidden);
    resolved.network.hidden = Some(hidden.clone());
    args.train.apply(&mut resolved.train);
    resolved.train.validate()?;
    let sets = match &resolved.ablate.removal_sets {
        Some(sets) => sets.iter().map(|s| parse_removal_set(s)).collect::<Result<Vec<_>>>()?,
        None => default_removal_sets(),
    };
    let cfg = ExperimentConfig {
        hidden,
        train: resolved.train.clone(),
    };
    resolved.write_snapshot("ablate")?;
    let seed = cfg.train.seed;
    println!("ablation on {}: {} runs, seed {seed}", ds.name, sets.len() + 1);
    let result = par::with_jobs(resolved.ablate.jobs, || run_ablation(&ds, &cfg, &sets))?;
    let csv = result.to_csv();
    let path = resolved.out_dir.join(format!("ablation_{}_s{seed}.csv", cfg.hash()));
    write_file(&path, &csv)?;
    print!("{csv}");
    println!("wrote {}", path.display());
    Ok(())
}
