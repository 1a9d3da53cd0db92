//! Mean absolute error and its truncated ("percentile") variants.

use crate::dataset::Dataset;
use crate::error::{invalid, Result};
use crate::forest::Forest;
use crate::target_space::{arc_distance, TargetPoint, TargetSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Mean absolute error. Degrees for circular targets; for Euclidean
    /// targets the average over dimensions of the per-dimension MAE.
    pub mae: f64,
    /// Per-dimension MAE (a single entry for circular targets).
    pub mae_per_dim: Vec<f64>,
    /// Mean of the smallest `ceil(0.90·n)` absolute errors.
    pub mae_p90: f64,
    /// Mean of the smallest `ceil(0.95·n)` absolute errors.
    pub mae_p95: f64,
    pub n: usize,
}

/// Per-sample absolute error and per-dimension absolute errors.
///
/// Circular: shorter-arc difference in degrees. Euclidean: `|t_j − t̂_j|`,
/// with the per-sample error being their mean over `j`.
pub fn absolute_error(space: TargetSpace, truth: &TargetPoint, pred: &TargetPoint) -> (f64, Vec<f64>) {
    match space {
        TargetSpace::Circular => {
            let e = arc_distance(truth.radians(), pred.radians()).to_degrees();
            (e, vec![e])
        }
        TargetSpace::Euclidean { dim } => {
            let per: Vec<f64> = truth.values().iter().zip(pred.values()).map(|(a, b)| (a - b).abs()).collect();
            (per.iter().sum::<f64>() / dim as f64, per)
        }
    }
}

/// Mean of the smallest `ceil(fraction·n)` values of `sorted` (ascending).
pub fn truncated_mean(sorted: &[f64], fraction: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let m = ((fraction * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[..m].iter().sum::<f64>() / m as f64
}

/// Report for a list of per-sample errors, plus optional per-dimension sums.
pub fn report_from_errors(errors: &[f64], mae_per_dim: Vec<f64>) -> EvalReport {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = errors.len();
    EvalReport {
        mae: truncated_mean(&sorted, 1.0),
        mae_per_dim,
        mae_p90: truncated_mean(&sorted, 0.90),
        mae_p95: truncated_mean(&sorted, 0.95),
        n,
    }
}

pub fn report(space: TargetSpace, truth: &[TargetPoint], preds: &[TargetPoint]) -> Result<EvalReport> {
    if truth.is_empty() {
        return Err(invalid("cannot evaluate on zero samples"));
    }
    if truth.len() != preds.len() {
        return Err(invalid("one prediction per sample is required"));
    }
    let dims = match space {
        TargetSpace::Circular => 1,
        TargetSpace::Euclidean { dim } => dim,
    };
    let mut errors = Vec::with_capacity(truth.len());
    let mut per_dim = vec![0.0; dims];
    for (t, p) in truth.iter().zip(preds) {
        if !space.contains(t) || !space.contains(p) {
            return Err(invalid("target and prediction must lie in the target space"));
        }
        let (e, per) = absolute_error(space, t, p);
        errors.push(e);
        for (acc, v) in per_dim.iter_mut().zip(per) {
            *acc += v;
        }
    }
    let n = truth.len() as f64;
    per_dim.iter_mut().for_each(|v| *v /= n);
    Ok(report_from_errors(&errors, per_dim))
}

pub fn predict_all(forest: &Forest, data: &Dataset) -> Result<Vec<TargetPoint>> {
    (0..data.len()).map(|i| forest.predict(data.features.row(i))).collect()
}

pub fn evaluate(forest: &Forest, data: &Dataset) -> Result<EvalReport> {
    if data.space != forest.space {
        return Err(invalid("dataset and model use different target spaces"));
    }
    let preds = predict_all(forest, data)?;
    report(data.space, &data.targets, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraparound_error() {
        let (e, _) = absolute_error(
            TargetSpace::Circular,
            &TargetPoint::from_degrees(10.0),
            &TargetPoint::from_degrees(350.0),
        );
        assert!((e - 20.0).abs() < 1e-9);
    }

    #[test]
    fn perfect_predictions() {
        let t: Vec<TargetPoint> = (0..7).map(|i| TargetPoint::from_degrees(i as f64 * 50.0)).collect();
        let r = report(TargetSpace::Circular, &t, &t).unwrap();
        assert_eq!((r.mae, r.mae_p90, r.mae_p95, r.n), (0.0, 0.0, 0.0, 7));
    }

    #[test]
    fn one_to_ten() {
        let errors: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = report_from_errors(&errors, vec![]);
        assert_eq!(r.mae, 5.5);
        assert_eq!(r.mae_p90, 5.0);
        // ceil(9.5) = 10
        assert_eq!(r.mae_p95, 5.5);
    }

    #[test]
    fn euclidean_per_dim() {
        let s = TargetSpace::euclidean(2).unwrap();
        let t = vec![TargetPoint::euclidean(vec![0.0, 0.0]), TargetPoint::euclidean(vec![1.0, 1.0])];
        let p = vec![TargetPoint::euclidean(vec![1.0, -3.0]), TargetPoint::euclidean(vec![1.0, 2.0])];
        let r = report(s, &t, &p).unwrap();
        assert_eq!(r.mae_per_dim, vec![0.5, 2.0]);
        assert_eq!(r.mae, 1.25);
        assert!(report(s, &t, &p[..1]).is_err());
        assert!(report(s, &[], &[]).is_err());
    }
}
