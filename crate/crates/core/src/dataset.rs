use crate::error::{invalid, Error, Result};
use crate::target_space::{TargetPoint, TargetSpace};

/// Dense row-major `N × p` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Features {
    pub fn new(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(invalid("feature matrix needs at least one column"));
        }
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "feature buffer has {} values, expected {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Features { data, rows, cols })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged feature rows"));
        }
        let n = rows.len();
        Features::new(rows.into_iter().flatten().collect(), n, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Features {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Features {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }
}

/// Features paired with targets from one [`TargetSpace`], plus optional
/// group ids used for leave-one-group-out validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Features,
    pub targets: Vec<TargetPoint>,
    pub space: TargetSpace,
    pub groups: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Features, targets: Vec<TargetPoint>, space: TargetSpace) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(invalid(format!(
                "{} feature rows but {} targets",
                features.rows(),
                targets.len()
            )));
        }
        if !features.is_finite() {
            return Err(invalid("features must be finite"));
        }
        if let Some(bad) = targets.iter().position(|t| !space.contains(t)) {
            return Err(invalid(format!("target {bad} is not a point of {space:?}")));
        }
        Ok(Dataset {
            features,
            targets,
            space,
            groups: None,
        })
    }

    pub fn with_groups(mut self, groups: Vec<String>) -> Result<Self> {
        if groups.len() != self.len() {
            return Err(invalid("one group id per sample is required"));
        }
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn ensure_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(indices),
            targets: indices.iter().map(|&i| self.targets[i].clone()).collect(),
            space: self.space,
            groups: self
                .groups
                .as_ref()
                .map(|g| indices.iter().map(|&i| g[i].clone()).collect()),
        }
    }
}
