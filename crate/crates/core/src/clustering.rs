//! Lloyd k-means in a [`TargetSpace`].
//!
//! Assignment uses the space's loss, the update step uses the space's mean,
//! so the same loop minimizes within-cluster SSE for Euclidean targets and
//! the summed `1 - cos` loss for angles.

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::rng;
use crate::target_space::{normalize_angle, TargetPoint, TargetSpace, DEGENERATE_RESULTANT};

pub const DEFAULT_MAX_ITERS: usize = 100;

/// A hard partition of a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index of each target, always `< k_effective()`.
    pub assignments: Vec<usize>,
    pub centroids: Vec<TargetPoint>,
    /// Sum of losses from each target to its centroid.
    pub objective: f64,
}

impl Clustering {
    pub fn k_effective(&self) -> usize {
        self.centroids.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// k-means from `k` distinct data points drawn uniformly without replacement.
///
/// `k` is clamped to the number of distinct targets; empty clusters are
/// dropped, so the result may have fewer than `k` clusters.
pub fn kmeans(
    space: TargetSpace,
    targets: &[TargetPoint],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Clustering> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    check_targets(space, targets)?;
    let mut rng = rng::seeded(seed);
    let init = sample_distinct(targets, k, &mut rng);
    Ok(lloyd(space, targets, init, max_iters, false).0)
}

/// k-means from explicit initial centroids.
pub fn kmeans_from(
    space: TargetSpace,
    targets: &[TargetPoint],
    init: Vec<TargetPoint>,
    max_iters: usize,
) -> Result<Clustering> {
    check_targets(space, targets)?;
    if init.is_empty() {
        return Err(invalid("at least one initial centroid is required"));
    }
    if init.iter().any(|c| c.values().len() != space.dim()) {
        return Err(invalid("initial centroid dimension mismatch"));
    }
    Ok(lloyd(space, targets, init, max_iters, false).0)
}

/// Like [`kmeans_from`], also returning the objective after every assignment
/// and update step, in order.
pub fn kmeans_trace(
    space: TargetSpace,
    targets: &[TargetPoint],
    init: Vec<TargetPoint>,
    max_iters: usize,
) -> Result<(Clustering, Vec<f64>)> {
    check_targets(space, targets)?;
    if init.is_empty() {
        return Err(invalid("at least one initial centroid is required"));
    }
    Ok(lloyd(space, targets, init, max_iters, true))
}

/// Number of distinct target values (exact comparison).
pub fn distinct_count(targets: &[TargetPoint]) -> usize {
    let mut seen: Vec<&TargetPoint> = Vec::new();
    for t in targets {
        if !seen.contains(&t) {
            seen.push(t);
        }
    }
    seen.len()
}

/// Index of the nearest centroid; ties go to the lowest index.
#[inline]
pub fn nearest(space: TargetSpace, point: &[f64], centroids: &[TargetPoint]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = space.loss_raw(point, c.values());
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub(crate) fn objective_of(
    space: TargetSpace,
    targets: &[TargetPoint],
    assignments: &[usize],
    centroids: &[TargetPoint],
) -> f64 {
    targets
        .iter()
        .zip(assignments)
        .map(|(t, &a)| space.loss_raw(t.values(), centroids[a].values()))
        .sum()
}

fn check_targets(space: TargetSpace, targets: &[TargetPoint]) -> Result<()> {
    if targets.is_empty() {
        return Err(invalid("cannot cluster an empty target set"));
    }
    if targets.iter().any(|t| t.values().len() != space.dim()) {
        return Err(invalid("target dimension does not match the space"));
    }
    Ok(())
}

/// Visits data points in uniformly random order (lazy Fisher-Yates) and keeps
/// the first `k` with distinct values.
fn sample_distinct(targets: &[TargetPoint], k: usize, rng: &mut rng::Rng) -> Vec<TargetPoint> {
    let n = targets.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut chosen: Vec<TargetPoint> = Vec::with_capacity(k);
    for i in 0..n {
        let j = rng.random_range(i..n);
        order.swap(i, j);
        let t = &targets[order[i]];
        if !chosen.contains(t) {
            chosen.push(t.clone());
            if chosen.len() == k {
                break;
            }
        }
    }
    chosen
}

/// Targets in a form where the loss is cheap to evaluate: raw coordinates
/// with squared distance, or unit vectors `(cos, sin)` with `1 − dot`.
struct Embedded {
    circular: bool,
    width: usize,
    data: Vec<f64>,
}

/// Index of the chunk of `centroids` with the smallest `loss` (first on ties).
#[inline(always)]
fn nearest_by(centroids: &[f64], width: usize, loss: impl Fn(&[f64]) -> f64) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(width).enumerate() {
        let d = loss(c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

impl Embedded {
    fn new(space: TargetSpace, targets: &[TargetPoint]) -> Self {
        let circular = space.is_circular();
        let width = if circular { 2 } else { space.dim() };
        let mut data = Vec::with_capacity(targets.len() * width);
        for t in targets {
            Self::push(circular, t, &mut data);
        }
        Embedded { circular, width, data }
    }

    fn push(circular: bool, t: &TargetPoint, out: &mut Vec<f64>) {
        if circular {
            let (sin, cos) = t.radians().sin_cos();
            out.extend_from_slice(&[cos, sin]);
        } else {
            out.extend_from_slice(t.values());
        }
    }

    fn embed_all(&self, points: &[TargetPoint]) -> Vec<f64> {
        let mut out = Vec::with_capacity(points.len() * self.width);
        for t in points {
            Self::push(self.circular, t, &mut out);
        }
        out
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    fn loss(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.circular {
            1.0 - (a[0] * b[0] + a[1] * b[1])
        } else {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        }
    }

    fn assign(&self, centroids: &[f64]) -> Vec<usize> {
        // Specialised loops for the common widths; each computes the same
        // floating-point expression as `loss`, so results are unchanged.
        if self.circular {
            return self.data.chunks_exact(2).map(|x| nearest_by(centroids, 2, |c| 1.0 - (x[0] * c[0] + x[1] * c[1]))).collect();
        }
        match self.width {
            1 => self.data.iter().map(|&x| nearest_by(centroids, 1, |c| (x - c[0]) * (x - c[0]))).collect(),
            2 => self
                .data
                .chunks_exact(2)
                .map(|x| {
                    nearest_by(centroids, 2, |c| {
                        let (a, b) = (x[0] - c[0], x[1] - c[1]);
                        a * a + b * b
                    })
                })
                .collect(),
            w => self.data.chunks_exact(w).map(|x| nearest_by(centroids, w, |c| self.loss(x, c))).collect(),
        }
    }

    fn objective(&self, assignments: &[usize], centroids: &[f64]) -> f64 {
        let w = self.width;
        assignments
            .iter()
            .enumerate()
            .map(|(i, &a)| self.loss(self.point(i), &centroids[a * w..(a + 1) * w]))
            .sum()
    }

    /// Cluster means, dropping empty clusters. Returns the new centroids and
    /// the old-to-new index map. A circular cluster with a degenerate mean
    /// keeps its previous centroid; every center has the same loss for it.
    fn update(&self, assignments: &[usize], centroids: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
        let w = self.width;
        let k = centroids.len() / w;
        let mut sums = vec![0.0; centroids.len()];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a * w..(a + 1) * w].iter_mut().zip(self.point(i)) {
                *s += v;
            }
        }
        let mut remap = vec![None; k];
        let mut next = Vec::with_capacity(centroids.len());
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            remap[j] = Some(next.len() / w);
            let sum = &sums[j * w..(j + 1) * w];
            let n = counts[j] as f64;
            if self.circular {
                let norm = sum[0].hypot(sum[1]);
                if norm / n < DEGENERATE_RESULTANT {
                    next.extend_from_slice(&centroids[j * w..(j + 1) * w]);
                } else {
                    // through the angle, so the stored centroid is exactly the
                    // embedding of the reported mean direction
                    let (sin, cos) = normalize_angle(sum[1].atan2(sum[0])).sin_cos();
                    next.extend_from_slice(&[cos, sin]);
                }
            } else {
                next.extend(sum.iter().map(|s| s / n));
            }
        }
        (next, remap)
    }

    fn to_points(&self, centroids: &[f64]) -> Vec<TargetPoint> {
        centroids
            .chunks_exact(self.width)
            .map(|c| {
                if self.circular {
                    TargetPoint::angle(c[1].atan2(c[0]))
                } else {
                    TargetPoint::euclidean(c.to_vec())
                }
            })
            .collect()
    }
}

fn lloyd(
    space: TargetSpace,
    targets: &[TargetPoint],
    init: Vec<TargetPoint>,
    max_iters: usize,
    record: bool,
) -> (Clustering, Vec<f64>) {
    let emb = Embedded::new(space, targets);
    let mut centroids = emb.embed_all(&init);
    let mut assignments = emb.assign(&centroids);
    // the objective after each half-step, only when asked for
    let mut trace = Vec::new();
    let log = |trace: &mut Vec<f64>, assignments: &[usize], centroids: &[f64]| {
        if record {
            push_checked(trace, emb.objective(assignments, centroids));
        }
    };
    log(&mut trace, &assignments, &centroids);
    let mut moved = false;

    for _ in 0..max_iters {
        let (next, remap) = emb.update(&assignments, &centroids);
        for a in assignments.iter_mut() {
            *a = remap[*a].expect("assigned cluster is non-empty");
        }
        centroids = next;
        moved = true;
        log(&mut trace, &assignments, &centroids);

        let reassigned = emb.assign(&centroids);
        log(&mut trace, &reassigned, &centroids);
        if reassigned == assignments {
            break;
        }
        assignments = reassigned;
    }

    // Initial centroids are reported unchanged when no update ran.
    let points = if moved { emb.to_points(&centroids) } else { init };
    // Only reachable with clusters emptied by the final assignment when the
    // iteration cap was hit.
    let (centroids, assignments) = compact(points, assignments);
    let objective = objective_of(space, targets, &assignments, &centroids);
    (
        Clustering {
            assignments,
            centroids,
            objective,
        },
        trace,
    )
}

fn push_checked(trace: &mut Vec<f64>, value: f64) {
    let Some(&prev) = trace.last() else {
        trace.push(value);
        return;
    };
    debug_assert!(
        value <= prev + 1e-9 * prev.abs().max(1.0),
        "k-means objective increased: {prev} -> {value}"
    );
    trace.push(value);
}

fn compact(centroids: Vec<TargetPoint>, assignments: Vec<usize>) -> (Vec<TargetPoint>, Vec<usize>) {
    let mut used = vec![false; centroids.len()];
    for &a in &assignments {
        used[a] = true;
    }
    if used.iter().all(|&u| u) {
        return (centroids, assignments);
    }
    let mut remap = vec![usize::MAX; centroids.len()];
    let mut kept = Vec::new();
    for (j, c) in centroids.into_iter().enumerate() {
        if used[j] {
            remap[j] = kept.len();
            kept.push(c);
        }
    }
    let assignments = assignments.into_iter().map(|a| remap[a]).collect();
    (kept, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Vec<TargetPoint> {
        values.iter().map(|&v| TargetPoint::euclidean(vec![v])).collect()
    }

    fn degs(values: &[f64]) -> Vec<TargetPoint> {
        values.iter().map(|&v| TargetPoint::from_degrees(v)).collect()
    }

    fn e1() -> TargetSpace {
        TargetSpace::euclidean(1).unwrap()
    }

    /// Groups sample indices by cluster, as sorted sets, for label-free comparison.
    fn partition(c: &Clustering) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); c.k_effective()];
        for (i, &a) in c.assignments.iter().enumerate() {
            groups[a].push(i);
        }
        groups.sort();
        groups
    }

    #[test]
    fn two_gaps_on_a_line() {
        let t = line(&[0.0, 1.0, 10.0, 11.0]);
        // Every seed reaches the optimum here: any two distinct starting
        // points end up separated by the gap after one update.
        for seed in 0..20 {
            let c = kmeans(e1(), &t, 2, seed, DEFAULT_MAX_ITERS).unwrap();
            assert_eq!(partition(&c), vec![vec![0, 1], vec![2, 3]], "seed {seed}");
            let mut cents: Vec<f64> = c.centroids.iter().map(|p| p.values()[0]).collect();
            cents.sort_by(f64::total_cmp);
            assert_eq!(cents, vec![0.5, 10.5]);
            assert!((c.objective - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let t = line(&[3.0, -1.0, 7.0, 2.5, 2.5]);
        let c = kmeans(e1(), &t, 1, 9, DEFAULT_MAX_ITERS).unwrap();
        let mean = e1().mean(&t).unwrap();
        assert_eq!(c.k_effective(), 1);
        assert!((c.centroids[0].values()[0] - mean.values()[0]).abs() < 1e-12);
        assert!((c.objective - e1().total_loss(&t, &mean)).abs() < 1e-9);
    }

    #[test]
    fn circular_clusters_across_the_wrap() {
        let t = degs(&[5.0, 355.0, 175.0, 185.0]);
        // Starting from {175°, 185°} (or {5°, 355°}) Lloyd stalls at the
        // 90°/270° split, so only the seeds that start across the gap find it.
        let mut found = 0;
        for seed in 0..20 {
            let c = kmeans(TargetSpace::Circular, &t, 2, seed, DEFAULT_MAX_ITERS).unwrap();
            let p = partition(&c);
            if p != vec![vec![0, 1], vec![2, 3]] {
                assert_eq!(p, vec![vec![0, 2], vec![1, 3]], "seed {seed}");
                continue;
            }
            found += 1;
            let mut cents: Vec<f64> = c.centroids.iter().map(|p| p.degrees()).collect();
            cents.sort_by(f64::total_cmp);
            // 0° may come back as a hair under 360°
            let c0 = if cents[1] > 359.0 { cents.remove(1) - 360.0 } else { cents.remove(0) };
            assert!(c0.abs() < 1e-9, "{c0}");
            assert!((cents[0] - 180.0).abs() < 1e-9);
        }
        assert!(found >= 10, "only {found} of 20 seeds reached the optimum");
    }

    #[test]
    fn k_clamped_to_distinct_targets() {
        let t = line(&[1.0, 1.0, 1.0, 2.0, 2.0]);
        let c = kmeans(e1(), &t, 5, 3, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(c.k_effective(), 2);
        assert_eq!(c.objective, 0.0);
        let same = line(&[4.0; 6]);
        assert_eq!(kmeans(e1(), &same, 3, 1, 10).unwrap().k_effective(), 1);
    }

    #[test]
    fn errors() {
        assert!(kmeans(e1(), &[], 2, 0, 10).is_err());
        assert!(kmeans(e1(), &line(&[1.0]), 0, 0, 10).is_err());
        let bad = vec![TargetPoint::euclidean(vec![1.0, 2.0])];
        assert!(kmeans(e1(), &bad, 1, 0, 10).is_err());
    }

    #[test]
    fn empty_clusters_are_dropped() {
        // The centroid at 100 attracts nothing.
        let t = line(&[0.0, 1.0, 2.0]);
        let init = line(&[0.5, 100.0]);
        let c = kmeans_from(e1(), &t, init, 10).unwrap();
        assert_eq!(c.k_effective(), 1);
        assert!(c.assignments.iter().all(|&a| a == 0));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let cents = line(&[0.0, 2.0]);
        assert_eq!(nearest(e1(), &[1.0], &cents).0, 0);
    }

    fn check_invariants(space: TargetSpace, t: &[TargetPoint], c: &Clustering) {
        let k = c.k_effective();
        assert!(c.assignments.iter().all(|&a| a < k));
        assert!(c.sizes().iter().all(|&s| s > 0));
        let direct = objective_of(space, t, &c.assignments, &c.centroids);
        assert!((c.objective - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        // fixed point: no target has a strictly closer centroid
        for (x, &a) in t.iter().zip(&c.assignments) {
            let own = space.loss_raw(x.values(), c.centroids[a].values());
            let (_, best) = nearest(space, x.values(), &c.centroids);
            assert!(own <= best + 1e-12, "{own} vs {best}");
        }
    }

    proptest! {
        #[test]
        fn lloyd_invariants_euclidean(
            vals in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 2), 1..40),
            k in 1usize..8,
            seed in any::<u64>(),
        ) {
            let space = TargetSpace::euclidean(2).unwrap();
            let t: Vec<_> = vals.into_iter().map(TargetPoint::euclidean).collect();
            let c = kmeans(space, &t, k, seed, 1000).unwrap();
            check_invariants(space, &t, &c);
            prop_assert_eq!(c, kmeans(space, &t, k, seed, 1000).unwrap());
        }

        #[test]
        fn lloyd_invariants_circular(
            vals in prop::collection::vec(0.0..360.0f64, 1..40),
            k in 1usize..8,
            seed in any::<u64>(),
        ) {
            let t = degs(&vals);
            let c = kmeans(TargetSpace::Circular, &t, k, seed, 1000).unwrap();
            check_invariants(TargetSpace::Circular, &t, &c);
        }

        #[test]
        fn objective_never_increases(
            vals in prop::collection::vec(-50.0..50.0f64, 2..40),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let t = line(&vals);
            let mut rng = rng::seeded(seed);
            let init = sample_distinct(&t, k, &mut rng);
            let (_, trace) = kmeans_trace(e1(), &t, init, 100).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
            }
        }

        #[test]
        fn k_equal_to_distinct_count_gives_zero_objective(
            vals in prop::collection::hash_set(-1000i32..1000, 1..15),
            seed in any::<u64>(),
        ) {
            let t: Vec<_> = vals.iter().map(|&v| TargetPoint::euclidean(vec![v as f64])).collect();
            let c = kmeans(e1(), &t, t.len(), seed, 100).unwrap();
            prop_assert_eq!(c.objective, 0.0);
        }
    }
}
