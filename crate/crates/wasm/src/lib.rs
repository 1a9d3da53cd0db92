//! Browser bindings for the demo page in `www/`.
//!
//! The computations are plain Rust functions so they can be tested natively;
//! the `#[wasm_bindgen]` items only convert arguments and results.

use krf::harness::metrics;
use krf::harness::synth::{generate, Generator, SyntheticSpec};
use krf::model_selection::bic_curve as scores_by_k;
use krf::{train_forest, Dataset, Features, ForestConfig, Splitter, TargetPoint, TargetSpace, TreeConfig};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use wasm_bindgen::prelude::*;

pub type DemoResult<T> = Result<T, String>;

fn err(e: krf::Error) -> String {
    e.to_string()
}

/// BIC for K = 1, 2, … on 1-D targets (degrees when `circular`). Entries
/// that cannot be computed are NaN.
pub fn bic_values(values: &[f64], circular: bool, k_max: usize, seed: u64) -> DemoResult<Vec<f64>> {
    let (space, targets): (TargetSpace, Vec<TargetPoint>) = if circular {
        (TargetSpace::Circular, values.iter().map(|&d| TargetPoint::from_degrees(d)).collect())
    } else {
        (TargetSpace::Euclidean { dim: 1 }, values.iter().map(|&v| TargetPoint::euclidean(vec![v])).collect())
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    let curve = scores_by_k(space, &targets, k_max, seed).map_err(err)?;
    Ok(curve.iter().map(|s| s.map_or(f64::NAN, |s| s.bic)).collect())
}

#[wasm_bindgen(js_name = bicCurve)]
pub fn bic_curve_js(values: Vec<f64>, circular: bool, k_max: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    bic_values(&values, circular, k_max as usize, seed as u64).map_err(|e| JsError::new(&e))
}

fn forest_config(space: TargetSpace, splitter: Splitter, trees: usize, seed: u64) -> ForestConfig {
    let mut c = ForestConfig::new(TreeConfig::new(space, splitter));
    c.num_trees = trees;
    c.bagging_ratio_beta = 0.8;
    c.seed = seed;
    c
}

fn split(data: &Dataset) -> (Dataset, Dataset) {
    let cut = data.len() * 7 / 10;
    (data.subset(&(0..cut).collect::<Vec<_>>()), data.subset(&(cut..data.len()).collect::<Vec<_>>()))
}

/// A forest fitted on a 2-D input plane, sampled on a square grid.
#[wasm_bindgen]
pub struct PartitionView {
    points: Vec<f64>,
    grid: Vec<f64>,
    test_mae: f64,
    mean_leaves: f64,
}

#[wasm_bindgen]
impl PartitionView {
    /// Training and test samples as `x, y, target` triples.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    /// Predictions, row-major with y from +1 down to −1.
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }

    #[wasm_bindgen(getter, js_name = testMae)]
    pub fn test_mae(&self) -> f64 {
        self.test_mae
    }

    #[wasm_bindgen(getter, js_name = meanLeaves)]
    pub fn mean_leaves(&self) -> f64 {
        self.mean_leaves
    }
}

/// Grid coordinate `i` of `res` points spanning [-1, 1].
fn axis(i: usize, res: usize) -> f64 {
    -1.0 + 2.0 * (i as f64 + 0.5) / res as f64
}

/// Trains one forest on a piecewise-constant surface over [-1, 1]² with
/// oblique region walls. `splitter` is `krf`, `akrf` or `brf`.
#[allow(clippy::too_many_arguments)]
pub fn partition(
    seed: u64,
    n: usize,
    regions: usize,
    noise: f64,
    splitter: &str,
    k: usize,
    trees: usize,
    res: usize,
) -> DemoResult<PartitionView> {
    let splitter = match splitter {
        "krf" => Splitter::KrfFixed { k },
        "akrf" => Splitter::adaptive(),
        "brf" => Splitter::Binary,
        other => return Err(format!("unknown splitter {other:?}")),
    };
    if res == 0 || res > 400 {
        return Err("grid resolution must be in 1..=400".into());
    }
    let spec = SyntheticSpec { generator: Generator::PiecewiseConstant { regions, noise_sigma: noise }, n, p: 2, seed };
    let full = generate(&spec).map_err(err)?;
    // keep the first target coordinate so the surface can be drawn as a heat map
    let scalar: Vec<TargetPoint> = full.targets.iter().map(|t| TargetPoint::euclidean(vec![t.values()[0]])).collect();
    let data = Dataset::new(full.features.clone(), scalar, TargetSpace::Euclidean { dim: 1 }).map_err(err)?;
    let (train, test) = split(&data);
    let forest = train_forest(&train, &forest_config(data.space, splitter, trees, seed)).map_err(err)?;
    let test_mae = metrics::evaluate(&forest, &test).map_err(err)?.mae;

    let mut grid = Vec::with_capacity(res * res);
    for row in 0..res {
        let y = -axis(row, res);
        for col in 0..res {
            grid.push(forest.predict(&[axis(col, res), y]).map_err(err)?.values()[0]);
        }
    }
    let points = (0..data.len())
        .flat_map(|i| {
            let x = data.features.row(i);
            [x[0], x[1], data.targets[i].values()[0]]
        })
        .collect();
    let mean_leaves = forest.trees.iter().map(|t| t.leaves().len()).sum::<usize>() as f64 / trees as f64;
    Ok(PartitionView { points, grid, test_mae, mean_leaves })
}

#[wasm_bindgen(js_name = partition)]
#[allow(clippy::too_many_arguments)]
pub fn partition_js(
    seed: u32,
    n: u32,
    regions: u32,
    noise: f64,
    splitter: &str,
    k: u32,
    trees: u32,
    res: u32,
) -> Result<PartitionView, JsError> {
    partition(seed as u64, n as usize, regions as usize, noise, splitter, k as usize, trees as usize, res as usize)
        .map_err(|e| JsError::new(&e))
}

/// Circular and plain-number forests fitted to angles that cross 0°/360°.
#[wasm_bindgen]
pub struct WrapView {
    points: Vec<f64>,
    xs: Vec<f64>,
    circular: Vec<f64>,
    euclidean: Vec<f64>,
    circular_mae: f64,
    euclidean_mae: f64,
}

#[wasm_bindgen]
impl WrapView {
    /// Samples as `x, angle_deg` pairs.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }

    /// Circular-forest predictions at `xs`, degrees in [0, 360).
    #[wasm_bindgen(getter)]
    pub fn circular(&self) -> Vec<f64> {
        self.circular.clone()
    }

    /// Predictions of the forest that treats degrees as plain numbers.
    #[wasm_bindgen(getter)]
    pub fn euclidean(&self) -> Vec<f64> {
        self.euclidean.clone()
    }

    #[wasm_bindgen(getter, js_name = circularMae)]
    pub fn circular_mae(&self) -> f64 {
        self.circular_mae
    }

    #[wasm_bindgen(getter, js_name = euclideanMae)]
    pub fn euclidean_mae(&self) -> f64 {
        self.euclidean_mae
    }
}

/// Angles `center + spread·x + noise` over one input `x` in [-1, 1], fitted by
/// a circular AKRF and by the same forest on raw degrees.
pub fn wrap(seed: u64, n: usize, noise_deg: f64, center_deg: f64, spread_deg: f64, res: usize) -> DemoResult<WrapView> {
    if n < 10 {
        return Err("need at least 10 samples".into());
    }
    if !(noise_deg >= 0.0 && noise_deg.is_finite() && center_deg.is_finite() && spread_deg.is_finite()) {
        return Err("angles must be finite and noise non-negative".into());
    }
    let mut r = krf::rng::seeded(seed);
    let noise = Normal::new(0.0, noise_deg).map_err(|e| e.to_string())?;
    let (xs, angles): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|_| {
            let x: f64 = r.random_range(-1.0..1.0);
            let a = center_deg + spread_deg * x + noise.sample(&mut r);
            (x, TargetPoint::from_degrees(a).degrees())
        })
        .unzip();
    let features = Features::new(xs.clone(), n, 1).map_err(err)?;
    let circ = Dataset::new(features.clone(), angles.iter().map(|&a| TargetPoint::from_degrees(a)).collect(), TargetSpace::Circular)
        .map_err(err)?;
    let flat = Dataset::new(features, angles.iter().map(|&a| TargetPoint::euclidean(vec![a])).collect(), TargetSpace::Euclidean { dim: 1 })
        .map_err(err)?;

    let (c_train, c_test) = split(&circ);
    let (f_train, f_test) = split(&flat);
    let cf = train_forest(&c_train, &forest_config(TargetSpace::Circular, Splitter::adaptive(), 10, seed)).map_err(err)?;
    let ff = train_forest(&f_train, &forest_config(flat.space, Splitter::adaptive(), 10, seed)).map_err(err)?;
    let circular_mae = metrics::evaluate(&cf, &c_test).map_err(err)?.mae;
    let as_angles = |preds: Vec<TargetPoint>| preds.iter().map(|p| TargetPoint::from_degrees(p.values()[0])).collect::<Vec<_>>();
    let euclidean_mae = metrics::report(TargetSpace::Circular, &c_test.targets, &as_angles(metrics::predict_all(&ff, &f_test).map_err(err)?))
        .map_err(err)?
        .mae;

    let grid: Vec<f64> = (0..res).map(|i| axis(i, res)).collect();
    let mut circular = Vec::with_capacity(res);
    let mut euclidean = Vec::with_capacity(res);
    for &x in &grid {
        circular.push(cf.predict(&[x]).map_err(err)?.degrees());
        euclidean.push(ff.predict(&[x]).map_err(err)?.values()[0]);
    }
    let points = xs.iter().zip(&angles).flat_map(|(&x, &a)| [x, a]).collect();
    Ok(WrapView { points, xs: grid, circular, euclidean, circular_mae, euclidean_mae })
}

#[wasm_bindgen(js_name = wrapDemo)]
pub fn wrap_js(seed: u32, n: u32, noise_deg: f64, center_deg: f64, spread_deg: f64, res: u32) -> Result<WrapView, JsError> {
    wrap(seed as u64, n as usize, noise_deg, center_deg, spread_deg, res as usize).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bic_curve_prefers_two_modes() {
        let values = [350.0, 355.0, 0.0, 5.0, 10.0, 170.0, 175.0, 180.0, 185.0, 190.0];
        let curve = bic_values(&values, true, 10, 1).unwrap();
        assert_eq!(curve.len(), 5);
        let best = (1..curve.len()).filter(|&i| !curve[i].is_nan()).min_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
        assert_eq!(best + 1, 2);
        assert!(bic_values(&[f64::NAN], false, 3, 0).is_err());
    }

    #[test]
    fn partition_grid_shape() {
        let v = partition(3, 300, 4, 1.0, "krf", 3, 3, 12).unwrap();
        assert_eq!(v.grid.len(), 144);
        assert_eq!(v.points.len(), 900);
        assert!(v.test_mae.is_finite() && v.mean_leaves >= 1.0);
        assert!(partition(3, 300, 4, 1.0, "other", 3, 3, 12).is_err());
        let brf = partition(3, 300, 4, 1.0, "brf", 2, 3, 12).unwrap();
        assert_ne!(brf.grid, v.grid);
    }

    #[test]
    fn wrap_demo_favours_circular() {
        let v = wrap(0, 400, 5.0, 0.0, 40.0, 50).unwrap();
        assert_eq!(v.xs.len(), 50);
        assert!(v.circular.iter().all(|d| (0.0..360.0).contains(d)));
        assert!(v.circular_mae < v.euclidean_mae, "{} vs {}", v.circular_mae, v.euclidean_mae);
        assert!(wrap(0, 3, 5.0, 0.0, 40.0, 50).is_err());
    }
}
