//! Regression forests whose node splits come from clustering the targets
//! and then learning a linear classifier that reproduces the clusters from
//! the inputs.
//!
//! * [`tree::Splitter::KrfFixed`] splits every node into K children.
//! * [`tree::Splitter::KrfAdaptive`] picks K per node by BIC.
//! * [`tree::Splitter::Binary`] is the usual axis-aligned threshold split.
//!
//! Targets live in a [`TargetSpace`]: Euclidean `R^q` with squared loss, or
//! the unit circle with `1 - cos` loss and von Mises model selection.
//!
//! ```
//! use krf::{Dataset, Features, ForestConfig, Splitter, TargetPoint, TargetSpace, TreeConfig};
//!
//! let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
//! let features = Features::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap();
//! let targets = xs.iter().map(|&x| TargetPoint::euclidean(vec![if x < 20.0 { 0.0 } else { 1.0 }])).collect();
//! let data = Dataset::new(features, targets, TargetSpace::euclidean(1).unwrap()).unwrap();
//!
//! let tree = TreeConfig::new(data.space, Splitter::KrfFixed { k: 2 });
//! let forest = krf::train_forest(&data, &ForestConfig::new(tree)).unwrap();
//! let y = forest.predict(&[3.0]).unwrap();
//! assert!(y.values()[0] < 0.5);
//! ```

pub mod bessel;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod harness;
pub mod linear_classifier;
pub mod model_selection;
pub mod rng;
pub mod target_space;
pub mod tree;

pub use clustering::{kmeans, Clustering};
pub use dataset::{Dataset, Features};
pub use error::{Error, Result};
pub use forest::{train_forest, Forest, ForestConfig};
pub use linear_classifier::{train_ovr, OvrClassifier, OvrParams};
pub use model_selection::{bic, select_k, BicScore};
pub use target_space::{TargetPoint, TargetSpace};
pub use tree::{grow_tree, SplitRule, Splitter, Tree, TreeConfig, TreeNode};
