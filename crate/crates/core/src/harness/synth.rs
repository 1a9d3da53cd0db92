//! Synthetic datasets.

use std::f64::consts::TAU;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};

use crate::dataset::{Dataset, Features};
use crate::error::{invalid, Result};
use crate::rng::{self, Rng};
use crate::target_space::{TargetPoint, TargetSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// Features uniform in `[-1, 1]^p`, split into `regions` Voronoi cells of
    /// random centers (so cell walls are oblique hyperplanes). Each cell has a
    /// constant 2-D target in `[-60, 60]²`; Gaussian noise is added on top.
    PiecewiseConstant { regions: usize, noise_sigma: f64 },
    /// `k` equally sized groups with 1-D targets `N(j·separation, sigma²)`.
    /// Features are a per-group random center plus unit Gaussian noise.
    GaussianBlobs { k: usize, separation: f64, sigma: f64 },
    /// `k` equally sized groups of angles around `j·360°/k` with wrapped
    /// Gaussian spread. Features as for `GaussianBlobs`.
    CircularBlobs { k: usize, sigma_deg: f64 },
    /// Circular target `θ` uniform in `center ± spread`. Features are a random
    /// linear map of `(cos φ, sin φ, cos 2φ, sin 2φ)` where `φ` is `θ` plus
    /// `N(0, noise_deg²)`.
    RotationField { noise_deg: f64, center_deg: f64, spread_deg: f64 },
}

impl Generator {
    pub fn rotation_field(noise_deg: f64) -> Self {
        Generator::RotationField {
            noise_deg,
            center_deg: 180.0,
            spread_deg: 180.0,
        }
    }

    pub fn space(&self) -> TargetSpace {
        match self {
            Generator::PiecewiseConstant { .. } => TargetSpace::Euclidean { dim: 2 },
            Generator::GaussianBlobs { .. } => TargetSpace::Euclidean { dim: 1 },
            Generator::CircularBlobs { .. } | Generator::RotationField { .. } => TargetSpace::Circular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub generator: Generator,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(invalid("n and p must be positive"));
        }
        let ok = match self.generator {
            Generator::PiecewiseConstant { regions, noise_sigma } => regions >= 1 && noise_sigma >= 0.0,
            Generator::GaussianBlobs { k, separation, sigma } => {
                k >= 1 && separation.is_finite() && sigma >= 0.0
            }
            Generator::CircularBlobs { k, sigma_deg } => k >= 1 && sigma_deg >= 0.0,
            Generator::RotationField { noise_deg, center_deg, spread_deg } => {
                noise_deg >= 0.0 && center_deg.is_finite() && (0.0..=180.0).contains(&spread_deg)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid generator parameters {:?}", self.generator)))
        }
    }
}

/// Ground-truth group of each sample for the blob generators (`i mod k`).
pub fn blob_labels(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| i % k).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng::seeded(spec.seed);
    let (n, p) = (spec.n, spec.p);
    let mut features = Vec::with_capacity(n * p);
    let mut targets = Vec::with_capacity(n);

    match spec.generator {
        Generator::PiecewiseConstant { regions, noise_sigma } => {
            let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
            let centers: Vec<Vec<f64>> = (0..regions).map(|_| sample_vec(&mut r, &unit, p)).collect();
            let levels: Vec<[f64; 2]> = (0..regions)
                .map(|_| [60.0 * unit.sample(&mut r), 60.0 * unit.sample(&mut r)])
                .collect();
            for _ in 0..n {
                let x = sample_vec(&mut r, &unit, p);
                let region = nearest_center(&centers, &x);
                let t = levels[region].map(|v| v + noise_sigma * gauss(&mut r));
                features.extend_from_slice(&x);
                targets.push(TargetPoint::euclidean(t.to_vec()));
            }
        }
        Generator::GaussianBlobs { k, separation, sigma } => {
            let centers = blob_feature_centers(&mut r, k, p);
            for j in blob_labels(n, k) {
                features.extend(centers[j].iter().map(|c| c + gauss(&mut r)));
                targets.push(TargetPoint::euclidean(vec![j as f64 * separation + sigma * gauss(&mut r)]));
            }
        }
        Generator::CircularBlobs { k, sigma_deg } => {
            let centers = blob_feature_centers(&mut r, k, p);
            for j in blob_labels(n, k) {
                features.extend(centers[j].iter().map(|c| c + gauss(&mut r)));
                let deg = j as f64 * 360.0 / k as f64 + sigma_deg * gauss(&mut r);
                targets.push(TargetPoint::from_degrees(deg));
            }
        }
        Generator::RotationField { noise_deg, center_deg, spread_deg } => {
            let map: Vec<[f64; 4]> = (0..p)
                .map(|_| [gauss(&mut r), gauss(&mut r), gauss(&mut r), gauss(&mut r)])
                .collect();
            for _ in 0..n {
                let deg = center_deg + spread_deg * (2.0 * r.random::<f64>() - 1.0);
                let theta = deg.to_radians();
                let phi = theta + noise_deg.to_radians() * gauss(&mut r);
                let basis = [phi.cos(), phi.sin(), (2.0 * phi).cos(), (2.0 * phi).sin()];
                features.extend(map.iter().map(|row| row.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>()));
                targets.push(TargetPoint::angle(theta.rem_euclid(TAU)));
            }
        }
    }
    Dataset::new(Features::new(features, n, p)?, targets, spec.generator.space())
}

fn gauss(r: &mut Rng) -> f64 {
    StandardNormal.sample(r)
}

fn sample_vec(r: &mut Rng, dist: &Uniform<f64>, p: usize) -> Vec<f64> {
    (0..p).map(|_| dist.sample(r)).collect()
}

fn blob_feature_centers(r: &mut Rng, k: usize, p: usize) -> Vec<Vec<f64>> {
    let spread = Normal::new(0.0, 3.0).expect("valid sigma");
    (0..k).map(|_| (0..p).map(|_| spread.sample(r)).collect()).collect()
}

fn nearest_center(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::csv_io::write_csv;

    fn spec(generator: Generator, n: usize, p: usize) -> SyntheticSpec {
        SyntheticSpec { generator, n, p, seed: 3 }
    }

    #[test]
    fn blobs_have_three_modes() {
        let d = generate(&spec(Generator::GaussianBlobs { k: 3, separation: 50.0, sigma: 1.0 }, 60, 4)).unwrap();
        // histogram with 10-wide bins: exactly three occupied clumps
        let mut bins = [0usize; 12];
        for t in &d.targets {
            let b = ((t.values()[0] + 10.0) / 10.0).floor() as usize;
            bins[b] += 1;
        }
        let clumps = bins
            .iter()
            .enumerate()
            .filter(|&(i, &c)| c > 0 && (i == 0 || bins[i - 1] == 0))
            .count();
        assert_eq!(clumps, 3);
    }

    #[test]
    fn noiseless_piecewise_is_exact() {
        let d = generate(&spec(Generator::PiecewiseConstant { regions: 4, noise_sigma: 0.0 }, 200, 3)).unwrap();
        let mut levels: Vec<(f64, f64)> = d.targets.iter().map(|t| (t.values()[0], t.values()[1])).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        assert!(levels.len() <= 4);
    }

    #[test]
    fn same_seed_same_bytes() {
        let s = spec(Generator::rotation_field(5.0), 50, 6);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_csv(&generate(&s).unwrap(), &mut a).unwrap();
        write_csv(&generate(&s).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        write_csv(&generate(&SyntheticSpec { seed: 4, ..s }).unwrap(), &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rotation_field_stays_in_window() {
        let g = Generator::RotationField { noise_deg: 0.0, center_deg: 0.0, spread_deg: 30.0 };
        let d = generate(&spec(g, 300, 5)).unwrap();
        for t in &d.targets {
            let deg = t.degrees();
            assert!(deg <= 30.0 + 1e-9 || deg >= 330.0 - 1e-9, "{deg}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&spec(Generator::CircularBlobs { k: 0, sigma_deg: 1.0 }, 10, 2)).is_err());
        assert!(generate(&spec(Generator::CircularBlobs { k: 2, sigma_deg: 1.0 }, 0, 2)).is_err());
        assert!(generate(&spec(Generator::rotation_field(1.0), 10, 0)).is_err());
    }
}
