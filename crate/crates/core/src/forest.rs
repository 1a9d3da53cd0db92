//! Bagged ensembles of regression trees.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::seq::index;
use rand::Rng as _;

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::rng;
use crate::target_space::{Moments, TargetPoint, TargetSpace};
use crate::tree::{grow_tree, Tree, TreeConfig, TreeNode};

pub const DEFAULT_NUM_TREES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub num_trees: usize,
    /// Fraction of the training set each tree sees, drawn without replacement.
    pub bagging_ratio_beta: f64,
    /// Template for every tree. Its `seed` is replaced by a per-tree seed.
    pub tree_config: TreeConfig,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(tree_config: TreeConfig) -> Self {
        ForestConfig {
            num_trees: DEFAULT_NUM_TREES,
            bagging_ratio_beta: 1.0,
            tree_config,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(invalid("a forest needs at least one tree"));
        }
        if !(self.bagging_ratio_beta > 0.0 && self.bagging_ratio_beta <= 1.0) {
            return Err(invalid("beta must lie in (0, 1]"));
        }
        self.tree_config.validate()
    }

    /// Number of samples each tree is trained on.
    pub fn bag_size(&self, n: usize) -> usize {
        ((self.bagging_ratio_beta * n as f64).ceil() as usize).clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub space: TargetSpace,
    pub num_features: usize,
    pub config: ForestConfig,
}

/// A forest output. `degenerate` is set when the tree outputs were circular
/// with a vanishing resultant and the first tree's output was used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestPrediction {
    pub estimate: TargetPoint,
    pub degenerate: bool,
}

/// The sample indices (sorted) and tree seed used for tree `t`.
pub fn tree_bag(config: &ForestConfig, n: usize, t: usize) -> (Vec<usize>, u64) {
    let mut r = rng::stream(config.seed, t as u64);
    let mut bag = index::sample(&mut r, n, config.bag_size(n)).into_vec();
    bag.sort_unstable();
    (bag, r.random())
}

fn train_one(data: &Dataset, config: &ForestConfig, t: usize) -> Result<TreeNode> {
    let (bag, tree_seed) = tree_bag(config, data.len(), t);
    let tree_config = TreeConfig {
        seed: tree_seed,
        ..config.tree_config
    };
    let subset = if bag.len() == data.len() {
        std::borrow::Cow::Borrowed(data)
    } else {
        std::borrow::Cow::Owned(data.subset(&bag))
    };
    Ok(grow_tree(&subset, &tree_config)?.root)
}

pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
    config.validate()?;
    data.ensure_non_empty()?;
    if data.space != config.tree_config.space {
        return Err(invalid("dataset and forest config use different target spaces"));
    }

    #[cfg(feature = "parallel")]
    let trees = (0..config.num_trees)
        .into_par_iter()
        .map(|t| train_one(data, config, t))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let trees = (0..config.num_trees)
        .map(|t| train_one(data, config, t))
        .collect::<Result<Vec<_>>>()?;

    Ok(Forest {
        trees,
        space: data.space,
        num_features: data.num_features(),
        config: *config,
    })
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> Result<TargetPoint> {
        Ok(self.predict_detailed(x)?.estimate)
    }

    pub fn predict_detailed(&self, x: &[f64]) -> Result<ForestPrediction> {
        if x.len() != self.num_features {
            return Err(invalid(format!(
                "expected {} features, got {}",
                self.num_features,
                x.len()
            )));
        }
        let outputs: Vec<&TargetPoint> = self.trees.iter().map(|t| leaf_estimate(t, x)).collect();
        Ok(aggregate(self.space, &outputs))
    }

    /// Tree `i` as a standalone [`Tree`].
    pub fn tree(&self, i: usize) -> Tree {
        Tree {
            root: self.trees[i].clone(),
            space: self.space,
            num_features: self.num_features,
        }
    }
}

fn leaf_estimate<'a>(node: &'a TreeNode, x: &[f64]) -> &'a TargetPoint {
    match node.leaf_for(x) {
        TreeNode::Leaf { estimate, .. } => estimate,
        TreeNode::Internal { .. } => unreachable!(),
    }
}

/// Mean of tree outputs in `space`.
///
/// Outputs are summed in sorted order, so the result does not depend on the
/// order of the trees.
pub fn aggregate(space: TargetSpace, outputs: &[&TargetPoint]) -> ForestPrediction {
    let mut sorted = outputs.to_vec();
    sorted.sort_by(|a, b| {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut acc = Moments::new(space);
    for o in &sorted {
        acc.add(o.values());
    }
    match acc.mean() {
        Ok(estimate) => ForestPrediction {
            estimate,
            degenerate: false,
        },
        Err(_) => {
            log::warn!("tree outputs have no circular mean; using the first tree");
            ForestPrediction {
                estimate: outputs[0].clone(),
                degenerate: true,
            }
        }
    }
}
