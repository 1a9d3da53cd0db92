use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use krf::harness::{self, metrics, EvalReport, Folds, Generator, SyntheticSpec};
use krf::{train_forest, Dataset, Forest, ForestConfig, Splitter, TargetPoint, TargetSpace, TreeConfig, TreeNode};
use rand::seq::SliceRandom;
use serde_json::{json, Value};

use crate::report::{num, write_json, write_stdout, Output, Table};
use crate::{BenchArgs, CvArgs, EvalArgs, ForestArgs, GenArgs, GeneratorKind, PredictArgs, SplitterKind, TrainArgs};

/// Loads a labelled CSV. With `circular`, a single `t0` column is read as degrees.
fn load_dataset(path: &Path, circular: bool) -> Result<Dataset> {
    let data = harness::load_csv(path).with_context(|| format!("reading {}", path.display()))?;
    if !circular || data.space.is_circular() {
        return Ok(data);
    }
    as_circular(data).with_context(|| format!("reading {}", path.display()))
}

fn as_circular(data: Dataset) -> Result<Dataset> {
    ensure!(
        data.space == TargetSpace::Euclidean { dim: 1 },
        "circular targets need exactly one target column, found {}",
        data.space.dim()
    );
    let targets = data.targets.iter().map(|t| TargetPoint::from_degrees(t.values()[0])).collect();
    let out = Dataset::new(data.features, targets, TargetSpace::Circular)?;
    Ok(match data.groups {
        Some(g) => out.with_groups(g)?,
        None => out,
    })
}

fn splitter_name(s: &Splitter) -> String {
    match s {
        Splitter::KrfFixed { k } => format!("krf k={k}"),
        Splitter::KrfAdaptive { k_min, k_max } => format!("akrf k={k_min}-{k_max}"),
        Splitter::Binary => "brf".into(),
    }
}

fn config_label(c: &ForestConfig) -> String {
    match c.tree_config.splitter {
        Splitter::Binary => format!("brf gamma={}", c.tree_config.feature_ratio_gamma),
        s => splitter_name(&s),
    }
}

fn config_for(space: TargetSpace, args: &ForestArgs, kind: SplitterKind, k: usize, gamma: f64) -> ForestConfig {
    let splitter = match kind {
        SplitterKind::Krf => Splitter::KrfFixed { k },
        SplitterKind::Akrf => Splitter::KrfAdaptive { k_min: args.k_range.0, k_max: args.k_range.1 },
        SplitterKind::Brf => Splitter::Binary,
    };
    let mut tree = TreeConfig::new(space, splitter);
    tree.min_samples_leaf = args.min_leaf;
    tree.penalty_c = args.penalty_c;
    tree.feature_ratio_gamma = gamma;
    let mut c = ForestConfig::new(tree);
    c.num_trees = args.trees;
    c.bagging_ratio_beta = args.beta;
    c.seed = args.seed;
    c
}

/// Every configuration named by the (possibly list-valued) flags for `kind`.
fn grid(space: TargetSpace, args: &ForestArgs, kind: SplitterKind) -> Vec<ForestConfig> {
    match kind {
        SplitterKind::Krf => args.k.iter().map(|&k| config_for(space, args, kind, k, 1.0)).collect(),
        SplitterKind::Akrf => vec![config_for(space, args, kind, 2, 1.0)],
        SplitterKind::Brf => args.gamma.iter().map(|&g| config_for(space, args, kind, 2, g)).collect(),
    }
}

fn single_config(space: TargetSpace, args: &ForestArgs, kind: SplitterKind) -> Result<ForestConfig> {
    let mut g = grid(space, args, kind);
    ensure!(g.len() == 1, "give a single value for --k and --gamma here (lists are for `cv`)");
    let c = g.remove(0);
    c.validate()?;
    Ok(c)
}

fn config_json(c: &ForestConfig) -> Value {
    let t = &c.tree_config;
    let splitter = match t.splitter {
        Splitter::KrfFixed { k } => json!({ "kind": "krf", "k": k }),
        Splitter::KrfAdaptive { k_min, k_max } => json!({ "kind": "akrf", "k_min": k_min, "k_max": k_max }),
        Splitter::Binary => json!({ "kind": "brf", "gamma": t.feature_ratio_gamma }),
    };
    json!({
        "splitter": splitter,
        "trees": c.num_trees,
        "beta": c.bagging_ratio_beta,
        "min_leaf": t.min_samples_leaf,
        "penalty_c": t.penalty_c,
        "circular": t.space.is_circular(),
        "seed": c.seed,
    })
}

fn report_json(r: &EvalReport) -> Value {
    json!({ "n": r.n, "mae": r.mae, "mae_p90": r.mae_p90, "mae_p95": r.mae_p95, "mae_per_dim": r.mae_per_dim })
}

fn report_table(r: &EvalReport) -> Table {
    let mut t = Table::new(&["metric", "value"]);
    t.row(vec!["n".into(), r.n.to_string()]);
    t.row(vec!["mae".into(), num(r.mae)]);
    t.row(vec!["mae_p90".into(), num(r.mae_p90)]);
    t.row(vec!["mae_p95".into(), num(r.mae_p95)]);
    if r.mae_per_dim.len() > 1 {
        for (j, m) in r.mae_per_dim.iter().enumerate() {
            t.row(vec![format!("mae t{j}"), num(*m)]);
        }
    }
    t
}

fn maybe_write(out: Option<&Path>, value: &Value) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => Ok(()),
    }
}

pub fn gen(a: &GenArgs) -> Result<Output> {
    let generator = match a.generator {
        GeneratorKind::Piecewise => Generator::PiecewiseConstant { regions: a.k, noise_sigma: a.noise },
        GeneratorKind::Blobs => Generator::GaussianBlobs { k: a.k, separation: a.separation, sigma: a.sigma },
        GeneratorKind::CircularBlobs => Generator::CircularBlobs { k: a.k, sigma_deg: a.sigma },
        GeneratorKind::Rotation => {
            Generator::RotationField { noise_deg: a.noise, center_deg: a.center, spread_deg: a.spread }
        }
    };
    let spec = SyntheticSpec { generator, n: a.n, p: a.p, seed: a.seed };
    let data = harness::generate(&spec)?;
    harness::save_csv(&data, &a.out).with_context(|| format!("writing {}", a.out.display()))?;

    let targets = if data.space.is_circular() { "angle_deg".to_string() } else { format!("t0..t{}", data.space.dim() - 1) };
    let mut t = Table::new(&["generator", "n", "p", "targets", "file"]);
    t.row(vec![format!("{:?}", a.generator).to_lowercase(), a.n.to_string(), a.p.to_string(), targets, a.out.display().to_string()]);
    let j = json!({ "generator": format!("{generator:?}"), "n": a.n, "p": a.p, "seed": a.seed, "circular": data.space.is_circular(), "file": a.out });
    Ok(Output::new(t, j))
}

fn tree_stats(forest: &Forest) -> (f64, usize) {
    let leaves: usize = forest.trees.iter().map(|t| t.leaves().len()).sum();
    let depth = forest.trees.iter().map(TreeNode::depth).max().unwrap_or(0);
    (leaves as f64 / forest.trees.len() as f64, depth)
}

pub fn train(a: &TrainArgs) -> Result<Output> {
    let data = load_dataset(&a.data, a.forest.circular)?;
    let kind = a.forest.splitter.unwrap_or(SplitterKind::Akrf);
    let config = single_config(data.space, &a.forest, kind)?;
    let start = Instant::now();
    let forest = train_forest(&data, &config)?;
    let secs = start.elapsed().as_secs_f64();
    harness::save_model(&forest, &a.model).with_context(|| format!("writing {}", a.model.display()))?;
    let fit = harness::evaluate(&forest, &data)?;
    let (leaves, depth) = tree_stats(&forest);

    let mut t = Table::new(&["splitter", "trees", "n", "p", "mean leaves", "max depth", "train mae", "seconds"]);
    t.row(vec![
        config_label(&config),
        config.num_trees.to_string(),
        data.len().to_string(),
        data.num_features().to_string(),
        format!("{leaves:.1}"),
        depth.to_string(),
        num(fit.mae),
        format!("{secs:.2}"),
    ]);
    let j = json!({
        "config": config_json(&config),
        "n": data.len(),
        "p": data.num_features(),
        "mean_leaves": leaves,
        "max_depth": depth,
        "train": report_json(&fit),
        "train_seconds": secs,
        "model": a.model,
    });
    maybe_write(a.out.as_deref(), &j)?;
    Ok(Output::new(t, j))
}

pub fn predict(a: &PredictArgs) -> Result<Output> {
    let forest = harness::load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let features = harness::load_features(&a.data).with_context(|| format!("reading {}", a.data.display()))?;
    ensure!(
        features.cols() == forest.num_features,
        "model expects {} features, {} has {}",
        forest.num_features,
        a.data.display(),
        features.cols()
    );
    let mut preds = Vec::with_capacity(features.rows());
    let mut degenerate = 0;
    for i in 0..features.rows() {
        let p = forest.predict_detailed(features.row(i))?;
        degenerate += usize::from(p.degenerate);
        preds.push(p.estimate);
    }
    if degenerate > 0 {
        log::warn!("{degenerate} predictions had no circular mean; first tree used");
    }
    let Some(out) = &a.out else {
        let mut buf = Vec::new();
        harness::csv_io::write_predictions(forest.space, &preds, &mut buf)?;
        write_stdout(&buf)?;
        return Ok(Output::empty());
    };
    harness::save_predictions(forest.space, &preds, out).with_context(|| format!("writing {}", out.display()))?;
    let mut t = Table::new(&["rows", "degenerate", "file"]);
    t.row(vec![preds.len().to_string(), degenerate.to_string(), out.display().to_string()]);
    Ok(Output::new(t, json!({ "rows": preds.len(), "degenerate": degenerate, "file": out })))
}

pub fn eval(a: &EvalArgs) -> Result<Output> {
    let forest = harness::load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let data = load_dataset(&a.data, a.circular || forest.space.is_circular())?;
    ensure!(
        data.space == forest.space,
        "model predicts {:?} targets but {} holds {:?}",
        forest.space,
        a.data.display(),
        data.space
    );
    let r = harness::evaluate(&forest, &data)?;
    let j = json!({ "model": a.model, "data": a.data, "report": report_json(&r) });
    maybe_write(a.out.as_deref(), &j)?;
    Ok(Output::new(report_table(&r), j))
}

pub fn cv(a: &CvArgs) -> Result<Output> {
    let data = load_dataset(&a.data, a.forest.circular)?;
    let kind = a.forest.splitter.unwrap_or(SplitterKind::Akrf);
    let configs = grid(data.space, &a.forest, kind);
    for c in &configs {
        c.validate()?;
    }
    let folds = if a.groups {
        ensure!(data.groups.is_some(), "--groups needs a `group` column");
        Folds::LeaveOneGroupOut
    } else {
        ensure!(a.folds >= 2, "--folds must be at least 2");
        Folds::KFold(a.folds)
    };
    let result = harness::cross_validate(&data, &configs, folds, a.forest.seed)?;

    let mut t = Table::new(&["config", "validation mae", ""]);
    let mut rows = Vec::new();
    for (i, (c, s)) in configs.iter().zip(&result.scores).enumerate() {
        let mark = if i == result.best_index { "best" } else { "" };
        t.row(vec![config_label(c), s.map_or("skipped".into(), num), mark.into()]);
        rows.push(json!({ "config": config_json(c), "validation_mae": s }));
    }
    if let Some(path) = &a.model {
        let forest = train_forest(&data, &result.best)?;
        harness::save_model(&forest, path).with_context(|| format!("writing {}", path.display()))?;
    }
    let j = json!({
        "folds": match folds { Folds::KFold(k) => json!(k), Folds::LeaveOneGroupOut => json!("leave-one-group-out") },
        "scores": rows,
        "best_index": result.best_index,
        "best": config_json(&result.best),
    });
    maybe_write(a.out.as_deref(), &j)?;
    Ok(Output::new(t, j))
}

/// Random train/test split of `data` with about `fraction` of the rows held out.
fn holdout(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    ensure!(fraction > 0.0 && fraction < 1.0, "--test-fraction must lie in (0, 1)");
    let n = data.len();
    let n_test = ((fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
    ensure!(n >= 2, "need at least two rows to hold some out");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut krf::rng::stream(seed, u64::MAX));
    let (test, train) = idx.split_at(n_test);
    let (mut train, mut test) = (train.to_vec(), test.to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train), data.subset(&test)))
}

pub fn bench(a: &BenchArgs) -> Result<Output> {
    ensure!(a.runs >= 1, "--runs must be at least 1");
    let data = load_dataset(&a.data, a.forest.circular)?;
    let (train, test) = match &a.test {
        Some(p) => (data, load_dataset(p, a.forest.circular)?),
        None => holdout(&data, a.test_fraction, a.forest.seed)?,
    };
    if train.space != test.space || train.num_features() != test.num_features() {
        bail!("training and test files have different layouts");
    }
    let kinds = match a.forest.splitter {
        Some(k) => vec![k],
        None => vec![SplitterKind::Krf, SplitterKind::Akrf, SplitterKind::Brf],
    };

    let mut t = Table::new(&["method", "mae", "mae_p90", "mae_p95", "train s", "predict s"]);
    let mut rows = Vec::new();
    for kind in kinds {
        let base = single_config(train.space, &a.forest, kind)?;
        let mut reports = Vec::new();
        let (mut fit_s, mut pred_s) = (0.0, 0.0);
        for r in 0..a.runs {
            let config = ForestConfig { seed: base.seed.wrapping_add(r as u64), ..base };
            let start = Instant::now();
            let forest = train_forest(&train, &config)?;
            fit_s += start.elapsed().as_secs_f64();
            let start = Instant::now();
            let preds = metrics::predict_all(&forest, &test)?;
            pred_s += start.elapsed().as_secs_f64();
            reports.push(metrics::report(test.space, &test.targets, &preds)?);
        }
        let runs = a.runs as f64;
        let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / runs;
        let (mae, p90, p95) = (mean(|r| r.mae), mean(|r| r.mae_p90), mean(|r| r.mae_p95));
        t.row(vec![
            config_label(&base),
            num(mae),
            num(p90),
            num(p95),
            format!("{:.2}", fit_s / runs),
            format!("{:.3}", pred_s / runs),
        ]);
        rows.push(json!({
            "config": config_json(&base),
            "mae": mae,
            "mae_p90": p90,
            "mae_p95": p95,
            "runs": reports.iter().map(report_json).collect::<Vec<_>>(),
            "train_seconds": fit_s / runs,
            "predict_seconds": pred_s / runs,
        }));
    }
    let j = json!({ "n_train": train.len(), "n_test": test.len(), "methods": rows });
    maybe_write(a.out.as_deref(), &j)?;
    Ok(Output::new(t, j))
}
