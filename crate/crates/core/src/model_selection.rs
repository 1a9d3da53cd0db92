//! BIC scoring of clusterings and adaptive choice of the cluster count.
//!
//! Euclidean targets are modelled as a mixture of isotropic Gaussians with a
//! shared variance, angles as a mixture of von Mises distributions with a
//! shared concentration. Mixture weights are the cluster fractions.

use std::f64::consts::PI;

use crate::bessel;
use crate::clustering::{self, kmeans, kmeans_from, Clustering, DEFAULT_MAX_ITERS};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::target_space::{TargetPoint, TargetSpace};

/// Upper bound on the shared von Mises concentration.
pub const KAPPA_MAX: f64 = 5e11;

pub const DEFAULT_K_MIN: usize = 2;
pub const DEFAULT_K_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicScore {
    pub k: usize,
    pub log_likelihood: f64,
    pub penalty: f64,
    pub bic: f64,
}

impl BicScore {
    fn new(k: usize, log_likelihood: f64, penalty: f64) -> Self {
        BicScore {
            k,
            log_likelihood,
            penalty,
            bic: -2.0 * log_likelihood + penalty,
        }
    }
}

fn check_clustering(targets: &[TargetPoint], clustering: &Clustering) -> Result<()> {
    if targets.is_empty() {
        return Err(invalid("no targets"));
    }
    if clustering.assignments.len() != targets.len() {
        return Err(invalid("clustering does not cover the targets"));
    }
    let k = clustering.k_effective();
    if k == 0 || clustering.assignments.iter().any(|&a| a >= k) {
        return Err(invalid("clustering has out-of-range assignments"));
    }
    Ok(())
}

/// `Σ_k |T_k| ln |T_k| − N ln N`, the mixture-weight part of the log-likelihood.
fn weight_term(clustering: &Clustering) -> f64 {
    let n = clustering.assignments.len() as f64;
    let sizes: f64 = clustering
        .sizes()
        .into_iter()
        .filter(|&s| s > 0)
        .map(|s| {
            let s = s as f64;
            s * s.ln()
        })
        .sum();
    sizes - n * n.ln()
}

/// BIC under a shared-variance isotropic Gaussian mixture.
///
/// `σ² = SSE / (N − K)`, `ln L = −qN/2 ln(2πσ²) − (N − K)/2 + Σ|T_k| ln|T_k| − N ln N`,
/// penalty `(K − 1 + qK + 1) ln N`.
pub fn euclidean_bic(targets: &[TargetPoint], clustering: &Clustering) -> Result<BicScore> {
    check_clustering(targets, clustering)?;
    let q = targets[0].values().len();
    let space = TargetSpace::euclidean(q)?;
    let n = targets.len();
    let k = clustering.k_effective();
    if n <= k {
        return Err(Error::NotComputable(format!("N = {n} must exceed K = {k}")));
    }
    let sse = clustering::objective_of(space, targets, &clustering.assignments, &clustering.centroids);
    let variance = sse / (n - k) as f64;
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::NotComputable("zero within-cluster variance".into()));
    }
    let (nf, kf, qf) = (n as f64, k as f64, q as f64);
    let log_likelihood = -qf * nf / 2.0 * (2.0 * PI * variance).ln() - (nf - kf) / 2.0
        + weight_term(clustering);
    let penalty = (kf - 1.0 + qf * kf + 1.0) * nf.ln();
    Ok(BicScore::new(k, log_likelihood, penalty))
}

/// Approximate maximum-likelihood von Mises concentration for a mean
/// resultant length `r_bar`: `1 / (2 (1 − r_bar))`, capped at [`KAPPA_MAX`].
pub fn estimate_kappa(r_bar: f64) -> f64 {
    let r = r_bar.max(0.0);
    if r >= 1.0 - 1e-12 {
        return KAPPA_MAX;
    }
    (1.0 / (2.0 * (1.0 - r))).min(KAPPA_MAX)
}

/// BIC under a shared-concentration von Mises mixture.
///
/// `ln L = −N ln(2π I0(κ)) + κ Σ cos(t_i − a_k) + Σ|T_k| ln|T_k| − N ln N`,
/// penalty `2K ln N`.
pub fn circular_bic(targets: &[TargetPoint], clustering: &Clustering) -> Result<BicScore> {
    check_clustering(targets, clustering)?;
    let n = targets.len() as f64;
    let k = clustering.k_effective();
    let cos_sum: f64 = targets
        .iter()
        .zip(&clustering.assignments)
        .map(|(t, &a)| (t.radians() - clustering.centroids[a].radians()).cos())
        .sum();
    let kappa = estimate_kappa(cos_sum / n);
    let log_likelihood =
        -n * ((2.0 * PI).ln() + bessel::ln_i0(kappa)) + kappa * cos_sum + weight_term(clustering);
    let penalty = 2.0 * k as f64 * n.ln();
    Ok(BicScore::new(k, log_likelihood, penalty))
}

/// The space-appropriate BIC.
pub fn bic(space: TargetSpace, targets: &[TargetPoint], clustering: &Clustering) -> Result<BicScore> {
    match space {
        TargetSpace::Euclidean { .. } => euclidean_bic(targets, clustering),
        TargetSpace::Circular => circular_bic(targets, clustering),
    }
}

/// Largest K worth scoring for `n` targets with `distinct` distinct values.
///
/// Besides `N − 1` (positive variance denominator) and the distinct count,
/// K is held to `N / 2`: as K approaches N both likelihoods grow without
/// bound once a single pair is left merged.
pub fn k_upper_bound(k_max: usize, n: usize, distinct: usize) -> usize {
    k_max.min(n.saturating_sub(1)).min(n / 2).min(distinct)
}

/// Picks K in `[k_min, k_max]` (capped by [`k_upper_bound`]) with the smallest BIC.
///
/// Each K is clustered twice: once by [`kmeans`] from random data points
/// (seeded per K), once warm-started from the previous K's centroids plus the
/// target farthest from its centroid. The lower-objective clustering is
/// scored. K values whose BIC is not computable are skipped.
pub fn select_k(
    space: TargetSpace,
    targets: &[TargetPoint],
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<(Clustering, BicScore)> {
    if k_min < 2 || k_min > k_max {
        return Err(invalid(format!("invalid K range {k_min}..={k_max}")));
    }
    if targets.is_empty() {
        return Err(invalid("no targets"));
    }
    let upper = k_upper_bound(k_max, targets.len(), clustering::distinct_count(targets));
    if upper < k_min {
        return Err(Error::SelectionFailed { k_min, k_max });
    }

    let mut best: Option<(Clustering, BicScore)> = None;
    scan(space, targets, upper, seed, |k, chosen| {
        if k < k_min {
            return Ok(());
        }
        match bic(space, targets, chosen) {
            Ok(score) => {
                if best.as_ref().is_none_or(|(_, b)| score.bic < b.bic) {
                    best = Some((chosen.clone(), score));
                }
                Ok(())
            }
            Err(Error::NotComputable(reason)) => {
                log::debug!("skipping K={k}: {reason}");
                Ok(())
            }
            Err(e) => Err(e),
        }
    })?;
    best.ok_or(Error::SelectionFailed { k_min, k_max })
}

/// BIC of the clustering [`select_k`] would score for each K in `1..=k_max`
/// (capped by [`k_upper_bound`], but always including K = 1). `None` marks a
/// K whose BIC is not computable.
pub fn bic_curve(space: TargetSpace, targets: &[TargetPoint], k_max: usize, seed: u64) -> Result<Vec<Option<BicScore>>> {
    if targets.is_empty() {
        return Err(invalid("no targets"));
    }
    let upper = k_upper_bound(k_max, targets.len(), clustering::distinct_count(targets));
    let mut curve = vec![bic(space, targets, &single_cluster(space, targets)?).ok()];
    scan(space, targets, upper, seed, |_, chosen| {
        curve.push(bic(space, targets, chosen).ok());
        Ok(())
    })?;
    Ok(curve)
}

/// Calls `visit(k, clustering)` for K = 2..=upper, in order.
fn scan(
    space: TargetSpace,
    targets: &[TargetPoint],
    upper: usize,
    seed: u64,
    mut visit: impl FnMut(usize, &Clustering) -> Result<()>,
) -> Result<()> {
    let mut previous = single_cluster(space, targets)?;
    for k in 2..=upper {
        let random = kmeans(space, targets, k, rng::derive(seed, k as u64), DEFAULT_MAX_ITERS)?;
        let warm = kmeans_from(space, targets, grow_centroids(space, targets, &previous), DEFAULT_MAX_ITERS)?;
        let chosen = if warm.objective < random.objective { warm } else { random };
        visit(k, &chosen)?;
        previous = chosen;
    }
    Ok(())
}

fn single_cluster(space: TargetSpace, targets: &[TargetPoint]) -> Result<Clustering> {
    let center = space.mean(targets).unwrap_or_else(|_| targets[0].clone());
    kmeans_from(space, targets, vec![center], 1)
}

/// Previous centroids plus the target with the largest loss to its centroid
/// (lowest index on ties).
fn grow_centroids(space: TargetSpace, targets: &[TargetPoint], previous: &Clustering) -> Vec<TargetPoint> {
    let mut far = (0, f64::NEG_INFINITY);
    for (i, (t, &a)) in targets.iter().zip(&previous.assignments).enumerate() {
        let d = space.loss_raw(t.values(), previous.centroids[a].values());
        if d > far.1 {
            far = (i, d);
        }
    }
    let mut init = previous.centroids.clone();
    init.push(targets[far.0].clone());
    init
}
