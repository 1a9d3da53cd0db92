//! Model selection by cross-validated MAE.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::forest::{train_forest, ForestConfig};
use crate::rng;

use super::metrics::evaluate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Folds {
    /// Shuffled k-fold split.
    KFold(usize),
    /// One fold per distinct value of the dataset's group column.
    LeaveOneGroupOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_index: usize,
    pub best: ForestConfig,
    /// Mean validation MAE per grid entry; `None` if no fold could be scored.
    pub scores: Vec<Option<f64>>,
}

/// Fold id of every sample: a seeded shuffle dealt round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Fold ids and fold count for `folds` on `data`.
pub fn assign(data: &Dataset, folds: Folds, seed: u64) -> Result<(Vec<usize>, usize)> {
    match folds {
        Folds::KFold(k) => {
            if k < 2 {
                return Err(invalid("k-fold validation needs at least 2 folds"));
            }
            Ok((fold_assignment(data.len(), k, seed), k))
        }
        Folds::LeaveOneGroupOut => {
            let groups = data
                .groups
                .as_ref()
                .ok_or_else(|| invalid("leave-one-group-out needs a group column"))?;
            let mut names: Vec<&String> = Vec::new();
            let ids = groups
                .iter()
                .map(|g| match names.iter().position(|n| *n == g) {
                    Some(i) => i,
                    None => {
                        names.push(g);
                        names.len() - 1
                    }
                })
                .collect();
            Ok((ids, names.len()))
        }
    }
}

/// Picks the grid entry with the lowest mean validation MAE. Ties keep the
/// earlier entry. Folds with an empty training or validation side are skipped.
pub fn cross_validate(data: &Dataset, grid: &[ForestConfig], folds: Folds, seed: u64) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(invalid("empty configuration grid"));
    }
    data.ensure_non_empty()?;
    let (ids, num_folds) = assign(data, folds, seed)?;

    let mut splits = Vec::new();
    for f in 0..num_folds {
        let (val, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| ids[i] == f);
        if val.is_empty() || train.is_empty() {
            log::warn!("fold {f} has an empty train or validation part; skipped");
            continue;
        }
        splits.push((data.subset(&train), data.subset(&val)));
    }

    let mut scores = Vec::with_capacity(grid.len());
    for (c, config) in grid.iter().enumerate() {
        let mut total = 0.0;
        let mut used = 0usize;
        for (train, val) in &splits {
            match train_forest(train, config).and_then(|f| evaluate(&f, val)) {
                Ok(r) => {
                    total += r.mae;
                    used += 1;
                }
                Err(e) => log::warn!("config {c}: fold skipped ({e})"),
            }
        }
        scores.push((used > 0).then(|| total / used as f64));
    }

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
    }
    let (best_index, _) = best.ok_or_else(|| invalid("no configuration could be validated"))?;
    Ok(CvResult {
        best_index,
        best: grid[best_index],
        scores,
    })
}
