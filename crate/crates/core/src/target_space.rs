//! Target geometries: Euclidean `R^q` and the unit circle.
//!
//! Each space defines a loss between two targets and a mean that minimizes
//! the total loss of a point set. Squared Euclidean distance pairs with the
//! arithmetic mean; `1 - cos(a - b)` pairs with the mean direction
//! `atan2(mean sin, mean cos)`. Angles are radians in `[0, 2π)` everywhere
//! inside the library.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Error, Result};

/// Resultant lengths below this are treated as zero when taking a circular mean.
pub const DEGENERATE_RESULTANT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSpace {
    Euclidean { dim: usize },
    Circular,
}

impl TargetSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("euclidean target dimension must be at least 1"));
        }
        Ok(TargetSpace::Euclidean { dim })
    }

    /// Number of reals stored per target point.
    pub fn dim(&self) -> usize {
        match *self {
            TargetSpace::Euclidean { dim } => dim,
            TargetSpace::Circular => 1,
        }
    }

    pub fn is_circular(&self) -> bool {
        matches!(self, TargetSpace::Circular)
    }

    /// Builds a point in this space, validating its length and normalizing angles.
    pub fn point(&self, values: Vec<f64>) -> Result<TargetPoint> {
        if values.len() != self.dim() {
            return Err(invalid(format!(
                "target has {} values, space expects {}",
                values.len(),
                self.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("target values must be finite"));
        }
        Ok(match self {
            TargetSpace::Euclidean { .. } => TargetPoint(values),
            TargetSpace::Circular => TargetPoint::angle(values[0]),
        })
    }

    pub fn contains(&self, point: &TargetPoint) -> bool {
        point.0.len() == self.dim()
            && match self {
                TargetSpace::Euclidean { .. } => true,
                TargetSpace::Circular => (0.0..TAU).contains(&point.0[0]),
            }
    }

    /// Loss between two targets of this space.
    pub fn loss(&self, a: &TargetPoint, b: &TargetPoint) -> Result<f64> {
        let dim = self.dim();
        if a.0.len() != dim || b.0.len() != dim {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {} (space dim {dim})",
                a.0.len(),
                b.0.len()
            )));
        }
        Ok(self.loss_raw(&a.0, &b.0))
    }

    /// Loss on raw coordinate slices. Callers guarantee matching lengths.
    #[inline]
    pub(crate) fn loss_raw(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            TargetSpace::Euclidean { .. } => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum(),
            TargetSpace::Circular => 1.0 - (a[0] - b[0]).cos(),
        }
    }

    /// Mean of a non-empty point set; minimizes the total loss to the points.
    pub fn mean(&self, points: &[TargetPoint]) -> Result<TargetPoint> {
        if points.is_empty() {
            return Err(invalid("mean of an empty point set"));
        }
        let mut acc = Moments::new(*self);
        for p in points {
            if p.0.len() != self.dim() {
                return Err(invalid("dimension mismatch in mean"));
            }
            acc.add(&p.0);
        }
        acc.mean()
    }

    /// Total loss of `points` about `center`.
    pub fn total_loss(&self, points: &[TargetPoint], center: &TargetPoint) -> f64 {
        points.iter().map(|p| self.loss_raw(&p.0, &center.0)).sum()
    }
}

/// A point of a [`TargetSpace`]: `q` reals, or one angle in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint(Vec<f64>);

impl TargetPoint {
    pub fn euclidean(values: Vec<f64>) -> Self {
        TargetPoint(values)
    }

    /// An angle in radians, wrapped into `[0, 2π)`.
    pub fn angle(radians: f64) -> Self {
        TargetPoint(vec![normalize_angle(radians)])
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::angle(degrees.to_radians())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// First coordinate; the angle for circular points.
    pub fn radians(&self) -> f64 {
        self.0[0]
    }

    pub fn degrees(&self) -> f64 {
        self.0[0].to_degrees()
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(radians: f64) -> f64 {
    let r = radians.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shorter-arc distance between two angles, in radians, within `[0, π]`.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Euclidean norm of the mean unit vector of a set of angles.
pub fn resultant_length(points: &[TargetPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("resultant length of an empty point set"));
    }
    let mut acc = Moments::new(TargetSpace::Circular);
    for p in points {
        acc.add(&p.0);
    }
    Ok(acc.resultant_length())
}

/// Running sufficient statistics for means and loss-about-mean.
///
/// Euclidean: per-dimension sums plus the sum of squared norms.
/// Circular: sums of cosines and sines.
#[derive(Debug, Clone)]
pub struct Moments {
    space: TargetSpace,
    count: usize,
    sums: Vec<f64>,
    sum_sq: f64,
}

impl Moments {
    pub fn new(space: TargetSpace) -> Self {
        let width = match space {
            TargetSpace::Euclidean { dim } => dim,
            TargetSpace::Circular => 2,
        };
        Moments {
            space,
            count: 0,
            sums: vec![0.0; width],
            sum_sq: 0.0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn add(&mut self, values: &[f64]) {
        self.count += 1;
        match self.space {
            TargetSpace::Euclidean { .. } => {
                for (s, v) in self.sums.iter_mut().zip(values) {
                    *s += v;
                    self.sum_sq += v * v;
                }
            }
            TargetSpace::Circular => {
                let (sin, cos) = values[0].sin_cos();
                self.sums[0] += cos;
                self.sums[1] += sin;
            }
        }
    }

    /// Length of the mean resultant vector (circular only).
    pub fn resultant_length(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.sums[0] / n).hypot(self.sums[1] / n)
    }

    pub fn mean(&self) -> Result<TargetPoint> {
        if self.count == 0 {
            return Err(invalid("mean of an empty point set"));
        }
        let n = self.count as f64;
        match self.space {
            TargetSpace::Euclidean { .. } => {
                Ok(TargetPoint(self.sums.iter().map(|s| s / n).collect()))
            }
            TargetSpace::Circular => {
                let r = self.resultant_length();
                if r < DEGENERATE_RESULTANT {
                    return Err(Error::DegenerateMean(r));
                }
                Ok(TargetPoint::angle((self.sums[1] / n).atan2(self.sums[0] / n)))
            }
        }
    }

    /// Total loss of the accumulated points about their mean.
    ///
    /// Euclidean: `Σ||t||² − ||Σt||²/n`. Circular: `n − |Σ(cos, sin)|`, which is
    /// also the value for a degenerate set, where every center is equally good.
    pub fn loss_about_mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        match self.space {
            TargetSpace::Euclidean { .. } => {
                let n = self.count as f64;
                let sq_of_sum: f64 = self.sums.iter().map(|s| s * s).sum();
                (self.sum_sq - sq_of_sum / n).max(0.0)
            }
            TargetSpace::Circular => {
                (self.count as f64 - self.sums[0].hypot(self.sums[1])).max(0.0)
            }
        }
    }
}
