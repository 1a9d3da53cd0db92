//! One-vs-rest L2-regularized squared-hinge linear SVM.
//!
//! For each class `k`, with `l_i = +1` if sample `i` belongs to `k` and `-1`
//! otherwise, the weight vector minimizes
//!
//! ```text
//! J(w) = ½‖w‖² + C Σ_i max(0, 1 − l_i wᵀx̃_i)²
//! ```
//!
//! where `x̃ = (x, 1)` carries the bias as its last weight. Each problem is
//! solved by a truncated Newton method that stops once `J(w) ≤ (1 + tol) J*`
//! is certified.

use crate::dataset::Features;
use crate::error::{invalid, Result};

pub const DEFAULT_PENALTY_C: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvrParams {
    pub penalty_c: f64,
    /// Relative optimality target for each binary problem.
    pub tolerance: f64,
    /// Cap on Newton steps per binary problem.
    pub max_iterations: usize,
}

impl Default for OvrParams {
    fn default() -> Self {
        OvrParams {
            penalty_c: DEFAULT_PENALTY_C,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// K linear scorers over `p` features; sample `x` goes to `argmax_k w_kᵀ(x, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrClassifier {
    /// One vector of length `p + 1` per class; the last entry is the bias.
    pub weights: Vec<Vec<f64>>,
    pub penalty_c: f64,
}

impl OvrClassifier {
    pub fn new(weights: Vec<Vec<f64>>, penalty_c: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("classifier needs at least one class"));
        }
        let len = weights[0].len();
        if len == 0 || weights.iter().any(|w| w.len() != len) {
            return Err(invalid("weight vectors must share a non-zero length"));
        }
        Ok(OvrClassifier { weights, penalty_c })
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn num_features(&self) -> usize {
        self.weights[0].len() - 1
    }

    /// `w_kᵀ(x, 1)`.
    #[inline]
    pub fn score(&self, class: usize, x: &[f64]) -> f64 {
        let w = &self.weights[class];
        let p = w.len() - 1;
        dot(&w[..p], x) + w[p]
    }

    /// Highest-scoring class, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.num_features() {
            return Err(invalid(format!(
                "expected {} features, got {}",
                self.num_features(),
                x.len()
            )));
        }
        Ok(self.route(x))
    }

    /// [`predict`](Self::predict) without the length check.
    #[inline]
    pub(crate) fn route(&self, x: &[f64]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for k in 0..self.weights.len() {
            let s = self.score(k, x);
            if s > best.1 {
                best = (k, s);
            }
        }
        best.0
    }

    /// Drops the given classes; other weight vectors keep their order.
    pub(crate) fn retain_classes(&mut self, keep: &[bool]) {
        let mut i = 0;
        self.weights.retain(|_| {
            let k = keep[i];
            i += 1;
            k
        });
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Primal objective `½‖w‖² + C Σ max(0, 1 − l_i wᵀx̃_i)²` of one binary problem.
pub fn binary_objective(features: &Features, positive: &[bool], w: &[f64], penalty_c: f64) -> f64 {
    let p = features.cols();
    let reg = 0.5 * dot(w, w);
    let loss: f64 = (0..features.rows())
        .map(|i| {
            let y = if positive[i] { 1.0 } else { -1.0 };
            let m = 1.0 - y * (dot(&w[..p], features.row(i)) + w[p]);
            if m > 0.0 {
                m * m
            } else {
                0.0
            }
        })
        .sum();
    reg + penalty_c * loss
}

/// Trains one binary problem per class in `0..num_classes`.
///
/// A class with no samples is trained against all-negative labels. When only
/// one class is present the result is the constant classifier for it: zero
/// weights, bias `+1` for that class and `-1` for the rest.
pub fn train_ovr(
    features: &Features,
    labels: &[usize],
    num_classes: usize,
    params: &OvrParams,
) -> Result<OvrClassifier> {
    let n = features.rows();
    if n == 0 {
        return Err(invalid("no training samples"));
    }
    if labels.len() != n {
        return Err(invalid("one label per sample is required"));
    }
    if num_classes < 2 {
        return Err(invalid("at least two classes are required"));
    }
    if labels.iter().any(|&l| l >= num_classes) {
        return Err(invalid("label out of range"));
    }
    if !is_positive(params.penalty_c) || !is_positive(params.tolerance) {
        return Err(invalid("penalty C and tolerance must be positive"));
    }
    if !features.is_finite() {
        return Err(invalid("features must be finite"));
    }

    if labels.iter().all(|&l| l == labels[0]) {
        let p = features.cols();
        let weights = (0..num_classes)
            .map(|k| {
                let mut w = vec![0.0; p + 1];
                w[p] = if k == labels[0] { 1.0 } else { -1.0 };
                w
            })
            .collect();
        return OvrClassifier::new(weights, params.penalty_c);
    }

    let weights = (0..num_classes)
        .map(|k| {
            let positive: Vec<bool> = labels.iter().map(|&l| l == k).collect();
            solve_binary(features, &positive, params)
        })
        .collect();
    OvrClassifier::new(weights, params.penalty_c)
}

/// Truncated Newton method on the primal (Keerthi & DeCoste's modified
/// finite Newton).
///
/// `J` is piecewise quadratic with generalized Hessian
/// `H = I + 2C Σ_{active} x̃_i x̃_iᵀ`, where a sample is active while its
/// margin `l_i wᵀx̃_i` is below 1. Each step solves `H d = −∇J` approximately
/// by conjugate gradients and backtracks along `d`. `J` is 1-strongly convex,
/// so `J(w) − J* ≤ ‖∇J(w)‖²/2`; stopping once that bound is at most
/// `tol/(1+tol) · J(w)` gives `J(w) ≤ (1 + tol) J*`.
fn solve_binary(features: &Features, positive: &[bool], params: &OvrParams) -> Vec<f64> {
    let n = features.rows();
    let p = features.cols();
    let c = params.penalty_c;
    let bound_target = params.tolerance / (1.0 + params.tolerance);
    let label: Vec<f64> = positive.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();

    let mut w = vec![0.0; p + 1];
    // margins l_i wᵀx̃_i
    let mut margin = vec![0.0; n];
    let mut objective = c * n as f64;
    let mut active: Vec<usize> = Vec::with_capacity(n);
    let mut z = vec![0.0; n];

    for iter in 0..params.max_iterations {
        active.clear();
        active.extend((0..n).filter(|&i| margin[i] < 1.0));
        let mut grad = w.clone();
        for &i in &active {
            let coef = -2.0 * c * label[i] * (1.0 - margin[i]);
            axpy(coef, features.row(i), 1.0, &mut grad);
        }
        let gg = dot(&grad, &grad);
        if 0.5 * gg <= bound_target * objective {
            log::trace!("svm converged after {iter} newton steps");
            return w;
        }

        let dir = newton_direction(features, &active, c, &grad, gg);
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = label[i] * (dot(&dir[..p], features.row(i)) + dir[p]);
        }
        let (ww, wd, dd, gd) = (dot(&w, &w), dot(&w, &dir), dot(&dir, &dir), dot(&grad, &dir));
        let at = |t: f64| {
            let loss: f64 = margin
                .iter()
                .zip(&z)
                .map(|(m, zi)| {
                    let slack = 1.0 - m - t * zi;
                    if slack > 0.0 {
                        slack * slack
                    } else {
                        0.0
                    }
                })
                .sum();
            0.5 * (ww + 2.0 * t * wd + t * t * dd) + c * loss
        };

        let mut step = 1.0;
        let mut next = at(step);
        while next > objective + 1e-4 * step * gd {
            step *= 0.5;
            if step < 1e-12 {
                log::debug!("svm line search stalled at J = {objective}");
                return w;
            }
            next = at(step);
        }
        for (wi, di) in w.iter_mut().zip(&dir) {
            *wi += step * di;
        }
        for (m, zi) in margin.iter_mut().zip(&z) {
            *m += step * zi;
        }
        objective = next;
    }
    log::debug!("svm hit the iteration cap ({})", params.max_iterations);
    w
}

/// `y[..p] += a·x`, `y[p] += a·bias`.
#[inline]
fn axpy(a: f64, x: &[f64], bias: f64, y: &mut [f64]) {
    let p = x.len();
    for (yi, xi) in y[..p].iter_mut().zip(x) {
        *yi += a * xi;
    }
    y[p] += a * bias;
}

/// Conjugate gradients on `H d = −g`, stopped at a relative residual of
/// `min(0.1, ‖g‖^½)`.
fn newton_direction(features: &Features, active: &[usize], c: f64, grad: &[f64], gg: f64) -> Vec<f64> {
    let dim = grad.len();
    let p = dim - 1;
    let g_norm = gg.sqrt();
    let stop = 0.1f64.min(g_norm.sqrt()) * g_norm;

    let mut d = vec![0.0; dim];
    let mut r: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut s = r.clone();
    let mut rr = gg;
    let mut hs = vec![0.0; dim];
    for _ in 0..2 * dim {
        if rr.sqrt() <= stop {
            break;
        }
        hs.copy_from_slice(&s);
        for &i in active {
            let x = features.row(i);
            let proj = dot(&s[..p], x) + s[p];
            axpy(2.0 * c * proj, x, 1.0, &mut hs);
        }
        let alpha = rr / dot(&s, &hs);
        for j in 0..dim {
            d[j] += alpha * s[j];
            r[j] -= alpha * hs[j];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for j in 0..dim {
            s[j] = r[j] + beta * s[j];
        }
    }
    d
}

/// `x > 0`, false for NaN.
fn is_positive(x: f64) -> bool {
    x.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn feats(rows: &[&[f64]]) -> Features {
        Features::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn separable_symmetric_pair() {
        let x = feats(&[&[-1.0], &[1.0]]);
        let clf = train_ovr(&x, &[0, 1], 2, &OvrParams::default()).unwrap();
        assert_eq!(clf.predict(&[-1.0]).unwrap(), 0);
        assert_eq!(clf.predict(&[1.0]).unwrap(), 1);
        assert_eq!(clf.num_classes(), 2);
        assert_eq!(clf.num_features(), 1);
    }

    #[test]
    fn single_class_present_routes_everything_there() {
        let x = feats(&[&[0.0, 1.0], &[2.0, -1.0], &[5.0, 3.0], &[-4.0, 0.5]]);
        let clf = train_ovr(&x, &[1, 1, 1, 1], 3, &OvrParams::default()).unwrap();
        for i in 0..x.rows() {
            assert_eq!(clf.predict(x.row(i)).unwrap(), 1);
        }
        assert_eq!(clf.predict(&[100.0, -100.0]).unwrap(), 1);
    }

    #[test]
    fn predict_examples() {
        let clf = OvrClassifier::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 1.0).unwrap();
        assert_eq!(clf.predict(&[2.0, 1.0]).unwrap(), 0);
        let zeros = OvrClassifier::new(vec![vec![0.0; 3]; 4], 1.0).unwrap();
        assert_eq!(zeros.predict(&[5.0, -2.0]).unwrap(), 0);
        assert!(clf.predict(&[1.0]).is_err());
    }

    #[test]
    fn predict_agrees_with_score_enumeration() {
        let mut r = rng::seeded(77);
        for _ in 0..100 {
            let k = r.random_range(2..6);
            let p = r.random_range(1..6);
            let w: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..=p).map(|_| r.random_range(-3.0..3.0)).collect())
                .collect();
            let clf = OvrClassifier::new(w.clone(), 1.0).unwrap();
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-3.0..3.0)).collect();
            let scores: Vec<f64> = w
                .iter()
                .map(|wk| wk[..p].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + wk[p])
                .collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let expected = scores.iter().position(|&s| s == max).unwrap();
            assert_eq!(clf.predict(&x).unwrap(), expected);
        }
    }

    #[test]
    fn input_errors() {
        let x = feats(&[&[0.0], &[1.0]]);
        let p = OvrParams::default();
        assert!(train_ovr(&x, &[0, 1], 1, &p).is_err());
        assert!(train_ovr(&x, &[0], 2, &p).is_err());
        assert!(train_ovr(&x, &[0, 2], 2, &p).is_err());
        let nan = feats(&[&[f64::NAN], &[1.0]]);
        assert!(train_ovr(&nan, &[0, 1], 2, &p).is_err());
        let bad = OvrParams { penalty_c: 0.0, ..p };
        assert!(train_ovr(&x, &[0, 1], 2, &bad).is_err());
    }

    #[test]
    fn objective_not_worse_than_zero_vector() {
        let mut r = rng::seeded(5);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = (0..30).map(|_| r.random_range(0..3)).collect();
        let x = Features::from_rows(rows).unwrap();
        let clf = train_ovr(&x, &labels, 3, &OvrParams::default()).unwrap();
        for k in 0..3 {
            let pos: Vec<bool> = labels.iter().map(|&l| l == k).collect();
            let j = binary_objective(&x, &pos, &clf.weights[k], 1.0);
            assert!(j <= 30.0, "J(w) = {j} exceeds J(0) = C·N");
        }
    }

    #[test]
    fn deterministic() {
        let mut r = rng::seeded(8);
        let rows: Vec<Vec<f64>> = (0..25).map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = (0..25).map(|_| r.random_range(0..3)).collect();
        let x = Features::from_rows(rows).unwrap();
        let a = train_ovr(&x, &labels, 3, &OvrParams::default()).unwrap();
        let b = train_ovr(&x, &labels, 3, &OvrParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn retained_classes_keep_order() {
        let mut clf = OvrClassifier::new(vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        clf.retain_classes(&[true, false, true]);
        assert_eq!(clf.weights, vec![vec![1.0, 0.0], vec![3.0, 0.0]]);
    }
}
