//! Regression trees with constant leaves.
//!
//! Two ways to split a node:
//!
//! * **K-ary (KRF / AKRF).** Cluster the node's targets with k-means (fixed
//!   K, or K chosen by BIC), train a one-vs-rest linear classifier that maps
//!   features to cluster ids, and send every sample to the child its
//!   classifier picks. Children are defined by the classifier, not by the
//!   clustering, so misclassified samples follow the rule that test samples
//!   will follow.
//! * **Binary (BRF).** Exhaustive search over axis-aligned thresholds on a
//!   random fraction γ of the feature dimensions, minimizing the summed loss
//!   of the two children about their means.
//!
//! Leaves predict the space-appropriate mean of their training targets.

use rand::seq::index;
use rand::Rng as _;

use crate::clustering::{kmeans, DEFAULT_MAX_ITERS};
use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linear_classifier::{train_ovr, OvrClassifier, OvrParams};
use crate::model_selection::{select_k, DEFAULT_K_MAX, DEFAULT_K_MIN};
use crate::rng::{self, Rng};
use crate::target_space::{Moments, TargetPoint, TargetSpace};

pub const DEFAULT_MIN_SAMPLES_LEAF: usize = 5;
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splitter {
    /// k-means with a fixed K, then a linear classifier.
    KrfFixed { k: usize },
    /// K chosen per node by BIC over `k_min..=k_max`.
    KrfAdaptive { k_min: usize, k_max: usize },
    /// Axis-aligned thresholds.
    Binary,
}

impl Splitter {
    pub fn adaptive() -> Self {
        Splitter::KrfAdaptive {
            k_min: DEFAULT_K_MIN,
            k_max: DEFAULT_K_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub splitter: Splitter,
    /// Nodes with fewer samples become leaves.
    pub min_samples_leaf: usize,
    pub penalty_c: f64,
    /// Fraction of feature dimensions searched per node (binary splitter only).
    pub feature_ratio_gamma: f64,
    pub space: TargetSpace,
    pub seed: u64,
    pub max_depth: usize,
}

impl TreeConfig {
    pub fn new(space: TargetSpace, splitter: Splitter) -> Self {
        TreeConfig {
            splitter,
            min_samples_leaf: DEFAULT_MIN_SAMPLES_LEAF,
            penalty_c: crate::linear_classifier::DEFAULT_PENALTY_C,
            feature_ratio_gamma: 1.0,
            space,
            seed: 0,
            max_depth: MAX_DEPTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.splitter {
            Splitter::KrfFixed { k } if k < 2 => return Err(invalid("fixed K must be at least 2")),
            Splitter::KrfAdaptive { k_min, k_max } if k_min < 2 || k_min > k_max => {
                return Err(invalid(format!("invalid K range {k_min}..={k_max}")))
            }
            _ => {}
        }
        if self.min_samples_leaf == 0 {
            return Err(invalid("min_samples_leaf must be positive"));
        }
        if self.penalty_c.is_nan() || self.penalty_c <= 0.0 {
            return Err(invalid("penalty C must be positive"));
        }
        if !(self.feature_ratio_gamma > 0.0 && self.feature_ratio_gamma <= 1.0) {
            return Err(invalid("gamma must lie in (0, 1]"));
        }
        if self.max_depth > MAX_DEPTH {
            return Err(invalid(format!("max_depth is capped at {MAX_DEPTH}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    Linear(OvrClassifier),
    /// `x[dim] <= threshold` goes to child 0, everything else to child 1.
    AxisThreshold { dim: usize, threshold: f64 },
}

impl SplitRule {
    pub fn num_children(&self) -> usize {
        match self {
            SplitRule::Linear(c) => c.num_classes(),
            SplitRule::AxisThreshold { .. } => 2,
        }
    }

    /// Child index for feature vector `x` (length already checked).
    #[inline]
    pub fn route(&self, x: &[f64]) -> usize {
        match self {
            SplitRule::Linear(c) => c.route(x),
            SplitRule::AxisThreshold { dim, threshold } => usize::from(x[*dim] > *threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        rule: SplitRule,
        children: Vec<TreeNode>,
    },
    Leaf {
        estimate: TargetPoint,
        sample_count: usize,
        /// The circular mean was undefined; `estimate` is the first sample's target.
        degenerate: bool,
    },
}

impl TreeNode {
    /// The leaf that `x` lands in.
    pub fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Internal { rule, children } = node {
            node = &children[rule.route(x)];
        }
        node
    }

    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match n {
                TreeNode::Leaf { .. } => out.push(n),
                TreeNode::Internal { children, .. } => stack.extend(children.iter().rev()),
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => 1 + children.iter().map(TreeNode::depth).max().unwrap_or(0),
        }
    }
}

/// A grown tree together with the shapes it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub root: TreeNode,
    pub space: TargetSpace,
    pub num_features: usize,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> Result<&TargetPoint> {
        if x.len() != self.num_features {
            return Err(invalid(format!(
                "expected {} features, got {}",
                self.num_features,
                x.len()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> &TargetPoint {
        match self.root.leaf_for(x) {
            TreeNode::Leaf { estimate, .. } => estimate,
            TreeNode::Internal { .. } => unreachable!("leaf_for always ends at a leaf"),
        }
    }
}

/// Output of a successful node split: the rule and, per child, the node
/// samples routed there.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub rule: SplitRule,
    pub children: Vec<Vec<usize>>,
}

/// K-ary split of the node holding `samples`. `Ok(None)` means "make a leaf".
///
/// Classes that receive no node sample are removed from the classifier. No
/// sample scores highest for such a class, so removing it changes no routing
/// of the node's samples.
pub fn split_node_krf(
    data: &Dataset,
    samples: &[usize],
    config: &TreeConfig,
    rng: &mut Rng,
) -> Result<Option<Split>> {
    let space = config.space;
    let targets: Vec<TargetPoint> = samples.iter().map(|&i| data.targets[i].clone()).collect();
    let clustering = match config.splitter {
        Splitter::KrfFixed { k } => kmeans(space, &targets, k, rng.random(), DEFAULT_MAX_ITERS)?,
        Splitter::KrfAdaptive { k_min, k_max } => {
            match select_k(space, &targets, k_min, k_max, rng.random()) {
                Ok((c, _)) => c,
                Err(Error::SelectionFailed { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Splitter::Binary => return Err(invalid("split_node_krf called with the binary splitter")),
    };
    let k = clustering.k_effective();
    if k < 2 {
        return Ok(None);
    }

    let features = data.features.select(samples);
    let params = OvrParams {
        penalty_c: config.penalty_c,
        ..OvrParams::default()
    };
    let mut classifier = train_ovr(&features, &clustering.assignments, k, &params)?;

    let routes: Vec<usize> = (0..samples.len()).map(|i| classifier.route(features.row(i))).collect();
    let mut children = vec![Vec::new(); k];
    for (&s, &r) in samples.iter().zip(&routes) {
        children[r].push(s);
    }
    let reached: Vec<bool> = children.iter().map(|c| !c.is_empty()).collect();
    if reached.iter().filter(|&&r| r).count() < 2 {
        return Ok(None);
    }
    if reached.iter().any(|&r| !r) {
        classifier.retain_classes(&reached);
        children.retain(|c| !c.is_empty());
    }
    Ok(Some(Split {
        rule: SplitRule::Linear(classifier),
        children,
    }))
}

/// Best axis-aligned threshold over a random `ceil(γ·p)` subset of dimensions.
///
/// Candidates are midpoints between consecutive distinct sorted values; ties
/// keep the first candidate in (dimension, threshold) order.
pub fn split_node_binary(
    data: &Dataset,
    samples: &[usize],
    config: &TreeConfig,
    rng: &mut Rng,
) -> Result<Option<Split>> {
    let p = data.num_features();
    let m = ((config.feature_ratio_gamma * p as f64).ceil() as usize).clamp(1, p);
    let mut dims = index::sample(rng, p, m).into_vec();
    dims.sort_unstable();

    let n = samples.len();
    let space = config.space;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order: Vec<usize> = samples.to_vec();
    let mut left_loss = vec![0.0; n + 1];

    for &dim in &dims {
        order.sort_by(|&a, &b| data.features.get(a, dim).total_cmp(&data.features.get(b, dim)));
        let value = |pos: usize| data.features.get(order[pos], dim);
        if value(0) == value(n - 1) {
            continue;
        }
        let mut acc = Moments::new(space);
        for pos in 0..n {
            acc.add(data.targets[order[pos]].values());
            left_loss[pos + 1] = acc.loss_about_mean();
        }
        let mut acc = Moments::new(space);
        // right part = order[pos..], visited from the end
        for pos in (1..n).rev() {
            acc.add(data.targets[order[pos]].values());
            let (lo, hi) = (value(pos - 1), value(pos));
            if lo == hi {
                continue;
            }
            let total = left_loss[pos] + acc.loss_about_mean();
            // ≤ keeps the lowest threshold among equal losses while scanning downwards
            if best.is_none_or(|(b, d, _)| total < b || (d == dim && total <= b)) {
                let mut threshold = 0.5 * (lo + hi);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some((total, dim, threshold));
            }
        }
    }

    let Some((_, dim, threshold)) = best else {
        return Ok(None);
    };
    let rule = SplitRule::AxisThreshold { dim, threshold };
    let mut children = vec![Vec::new(), Vec::new()];
    for &s in samples {
        children[rule.route(data.features.row(s))].push(s);
    }
    Ok(Some(Split { rule, children }))
}

/// Grows one tree on the whole dataset.
pub fn grow_tree(data: &Dataset, config: &TreeConfig) -> Result<Tree> {
    config.validate()?;
    data.ensure_non_empty()?;
    if data.space != config.space {
        return Err(invalid("dataset and tree config use different target spaces"));
    }
    let mut rng = rng::seeded(config.seed);
    let samples: Vec<usize> = (0..data.len()).collect();
    let root = grow_node(data, samples, config, &mut rng, 0)?;
    Ok(Tree {
        root,
        space: config.space,
        num_features: data.num_features(),
    })
}

fn grow_node(
    data: &Dataset,
    samples: Vec<usize>,
    config: &TreeConfig,
    rng: &mut Rng,
    depth: usize,
) -> Result<TreeNode> {
    if samples.len() < config.min_samples_leaf || depth >= config.max_depth {
        return Ok(make_leaf(data, &samples, config.space));
    }
    let split = match config.splitter {
        Splitter::Binary => split_node_binary(data, &samples, config, rng)?,
        _ => split_node_krf(data, &samples, config, rng)?,
    };
    let Some(split) = split else {
        return Ok(make_leaf(data, &samples, config.space));
    };
    let children = split
        .children
        .into_iter()
        .map(|child| grow_node(data, child, config, rng, depth + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeNode::Internal {
        rule: split.rule,
        children,
    })
}

fn make_leaf(data: &Dataset, samples: &[usize], space: TargetSpace) -> TreeNode {
    let mut acc = Moments::new(space);
    for &s in samples {
        acc.add(data.targets[s].values());
    }
    let (estimate, degenerate) = match acc.mean() {
        Ok(m) => (m, false),
        Err(_) => (data.targets[samples[0]].clone(), true),
    };
    TreeNode::Leaf {
        estimate,
        sample_count: samples.len(),
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Features;

    fn gap_data() -> Dataset {
        let xs = [0.0, 1.0, 10.0, 11.0];
        let f = Features::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap();
        let t = xs.iter().map(|&x| TargetPoint::euclidean(vec![x])).collect();
        Dataset::new(f, t, TargetSpace::euclidean(1).unwrap()).unwrap()
    }

    fn cfg(splitter: Splitter) -> TreeConfig {
        TreeConfig::new(TargetSpace::euclidean(1).unwrap(), splitter)
    }

    fn sorted(mut v: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        v.iter_mut().for_each(|c| c.sort_unstable());
        v.sort();
        v
    }

    #[test]
    fn krf_split_on_gap_data() {
        let d = gap_data();
        for seed in 0..10 {
            let mut r = rng::seeded(seed);
            let split = split_node_krf(&d, &[0, 1, 2, 3], &cfg(Splitter::KrfFixed { k: 2 }), &mut r)
                .unwrap()
                .unwrap();
            assert_eq!(sorted(split.children), vec![vec![0, 1], vec![2, 3]]);
            assert_eq!(split.rule.num_children(), 2);
        }
    }

    #[test]
    fn krf_identical_targets_no_split() {
        let f = Features::from_rows((0..6).map(|i| vec![i as f64]).collect()).unwrap();
        let t = vec![TargetPoint::euclidean(vec![2.0]); 6];
        let d = Dataset::new(f, t, TargetSpace::euclidean(1).unwrap()).unwrap();
        let mut r = rng::seeded(0);
        let all: Vec<usize> = (0..6).collect();
        assert!(split_node_krf(&d, &all, &cfg(Splitter::KrfFixed { k: 3 }), &mut r).unwrap().is_none());
        assert!(split_node_krf(&d, &all, &cfg(Splitter::adaptive()), &mut r).unwrap().is_none());
    }

    #[test]
    fn binary_split_on_gap_data() {
        let d = gap_data();
        let mut r = rng::seeded(0);
        let split = split_node_binary(&d, &[0, 1, 2, 3], &cfg(Splitter::Binary), &mut r).unwrap().unwrap();
        assert_eq!(split.rule, SplitRule::AxisThreshold { dim: 0, threshold: 5.5 });
        assert_eq!(split.children, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn binary_constant_feature_no_split() {
        let f = Features::from_rows(vec![vec![3.0]; 5]).unwrap();
        let t = (0..5).map(|i| TargetPoint::euclidean(vec![i as f64])).collect();
        let d = Dataset::new(f, t, TargetSpace::euclidean(1).unwrap()).unwrap();
        let mut r = rng::seeded(0);
        assert!(split_node_binary(&d, &[0, 1, 2, 3, 4], &cfg(Splitter::Binary), &mut r).unwrap().is_none());
    }

    #[test]
    fn small_dataset_is_one_leaf() {
        let d = gap_data();
        let t = grow_tree(&d, &cfg(Splitter::KrfFixed { k: 2 })).unwrap();
        match &t.root {
            TreeNode::Leaf { estimate, sample_count, degenerate } => {
                assert_eq!(estimate.values(), &[5.5]);
                assert_eq!(*sample_count, 4);
                assert!(!degenerate);
            }
            _ => panic!("expected a leaf"),
        }
    }

    #[test]
    fn depth_one_tree_on_gap_data() {
        let d = gap_data();
        let mut c = cfg(Splitter::KrfFixed { k: 2 });
        c.min_samples_leaf = 3;
        for seed in 0..5 {
            c.seed = seed;
            let t = grow_tree(&d, &c).unwrap();
            assert_eq!(t.root.depth(), 1);
            assert_eq!(t.predict(&[0.4]).unwrap().values(), &[0.5]);
            assert_eq!(t.predict(&[10.6]).unwrap().values(), &[10.5]);
            assert!(t.predict(&[1.0, 2.0]).is_err());
        }
    }

    #[test]
    fn degenerate_circular_leaf_uses_first_target() {
        let f = Features::from_rows(vec![vec![0.0], vec![0.0]]).unwrap();
        let t = vec![TargetPoint::from_degrees(30.0), TargetPoint::from_degrees(210.0)];
        let d = Dataset::new(f, t, TargetSpace::Circular).unwrap();
        let tree = grow_tree(&d, &TreeConfig::new(TargetSpace::Circular, Splitter::Binary)).unwrap();
        match tree.root {
            TreeNode::Leaf { estimate, degenerate, .. } => {
                assert!(degenerate);
                assert!((estimate.degrees() - 30.0).abs() < 1e-9);
            }
            _ => panic!("expected a leaf"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(Splitter::KrfFixed { k: 1 }).validate().is_err());
        assert!(cfg(Splitter::KrfAdaptive { k_min: 1, k_max: 4 }).validate().is_err());
        let mut c = cfg(Splitter::Binary);
        c.feature_ratio_gamma = 0.0;
        assert!(c.validate().is_err());
        c.feature_ratio_gamma = 1.0;
        c.min_samples_leaf = 0;
        assert!(c.validate().is_err());
        let d = gap_data();
        let circ = TreeConfig::new(TargetSpace::Circular, Splitter::Binary);
        assert!(grow_tree(&d, &circ).is_err());
    }
}
