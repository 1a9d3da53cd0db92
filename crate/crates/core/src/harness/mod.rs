//! Experiment plumbing: CSV datasets, synthetic generators, error metrics,
//! cross-validation and model files.

pub mod csv_io;
pub mod cv;
pub mod metrics;
pub mod persist;
pub mod synth;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub use csv_io::{load_csv, load_features, read_csv, read_features, save_csv, save_predictions, write_csv};
pub use cv::{cross_validate, fold_assignment, CvResult, Folds};
pub use metrics::{evaluate, EvalReport};
pub use persist::{decode_model, encode_model, load_model, save_model};
pub use synth::{generate, Generator, SyntheticSpec};

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
