//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use krf::{TargetPoint, TargetSpace};

/// Loss of a group about its own best center, computed from scratch.
pub fn group_loss(space: TargetSpace, members: &[&TargetPoint]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let n = members.len() as f64;
    match space {
        TargetSpace::Euclidean { dim } => {
            let mut total = 0.0;
            for d in 0..dim {
                let mean = members.iter().map(|t| t.values()[d]).sum::<f64>() / n;
                total += members.iter().map(|t| (t.values()[d] - mean).powi(2)).sum::<f64>();
            }
            total
        }
        TargetSpace::Circular => {
            // Σ(1 − cos(θ − c)) is minimized at the mean direction, where it is n − R
            let c: f64 = members.iter().map(|t| t.radians().cos()).sum();
            let s: f64 = members.iter().map(|t| t.radians().sin()).sum();
            n - c.hypot(s)
        }
    }
}

/// Minimum objective over every partition of `targets` into at most `k`
/// non-empty groups.
pub fn best_partition(space: TargetSpace, targets: &[TargetPoint], k: usize) -> f64 {
    let n = targets.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    // restricted growth strings: labels[i] <= max(labels[..i]) + 1
    fn rec(
        i: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        space: TargetSpace,
        targets: &[TargetPoint],
        best: &mut f64,
    ) {
        if i == labels.len() {
            let total: f64 = (0..used)
                .map(|g| {
                    let members: Vec<&TargetPoint> =
                        targets.iter().zip(labels.iter()).filter(|(_, &l)| l == g).map(|(t, _)| t).collect();
                    group_loss(space, &members)
                })
                .sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for g in 0..(used + 1).min(k) {
            labels[i] = g;
            rec(i + 1, used.max(g + 1), k, labels, space, targets, best);
        }
    }
    rec(0, 0, k, &mut labels, space, targets, &mut best);
    best
}

/// All `k`-subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// `½‖w‖² + C Σ max(0, 1 − y_i wᵀ(x_i, 1))²`.
pub fn svm_objective(rows: &[Vec<f64>], y: &[f64], w: &[f64], c: f64) -> f64 {
    let p = w.len() - 1;
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, yi)| {
            let score: f64 = x.iter().zip(&w[..p]).map(|(a, b)| a * b).sum::<f64>() + w[p];
            (1.0 - yi * score).max(0.0).powi(2)
        })
        .sum();
    reg + c * loss
}

fn svm_gradient(rows: &[Vec<f64>], y: &[f64], w: &[f64], c: f64) -> Vec<f64> {
    let p = w.len() - 1;
    let mut g = w.to_vec();
    for (x, yi) in rows.iter().zip(y) {
        let score: f64 = x.iter().zip(&w[..p]).map(|(a, b)| a * b).sum::<f64>() + w[p];
        let slack = 1.0 - yi * score;
        if slack > 0.0 {
            let coef = -2.0 * c * yi * slack;
            for j in 0..p {
                g[j] += coef * x[j];
            }
            g[p] += coef;
        }
    }
    g
}

/// Optimal squared-hinge objective by accelerated gradient descent with a
/// fixed `1/L` step, run until the gradient norm drops below `1e-8`.
pub fn reference_svm(rows: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let p = rows[0].len();
    // L ≤ 1 + 2C ‖X̃‖_F²
    let frob: f64 = rows.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0).sum();
    let lip = 1.0 + 2.0 * c * frob;
    let mut w = vec![0.0; p + 1];
    let mut prev = w.clone();
    for it in 0..2_000_000usize {
        let momentum = it as f64 / (it as f64 + 3.0);
        let look: Vec<f64> = w.iter().zip(&prev).map(|(a, b)| a + momentum * (a - b)).collect();
        let g = svm_gradient(rows, y, &look, c);
        let next: Vec<f64> = look.iter().zip(&g).map(|(a, b)| a - b / lip).collect();
        prev = std::mem::replace(&mut w, next);
        if it % 100 == 0 {
            let gn = svm_gradient(rows, y, &w, c).iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < 1e-8 {
                break;
            }
        }
    }
    svm_objective(rows, y, &w, c)
}
