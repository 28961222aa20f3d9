//! Multi-resolution, strided feature extraction.
//!
//! At every prediction timestep (0.5 s apart) a fixed set of 14 window
//! features is computed over past and future windows of 1, 2, 4, 8, 16 and
//! 32 seconds, for every accelerometer axis (or per-limb SMV channel).
//! Spectral entropy is skipped on the 1 s windows, giving 166 columns per
//! channel.

mod extract;
mod key;
mod matrix;
mod stats;

pub use extract::{compute_smv, extract, ChannelConfig};
pub use key::{AggStat, Channel, Direction, FeatureColumnKey, FeatureName, WindowPlan};
pub use matrix::{schema_path, FeatureMatrix, RowId};
pub use stats::{spectral_entropy, time_domain_features, TimeFeatures, TIME_FEATURE_COUNT};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("window has {0} usable samples, need at least {1}")]
    DegenerateWindow(usize, usize),
    #[error("column sets differ between matrices")]
    ColumnMismatch,
    #[error("row/value shape mismatch: {rows} rows x {cols} columns vs {values} values")]
    Shape {
        rows: usize,
        cols: usize,
        values: usize,
    },
    #[error("cannot parse {what}: `{text}`")]
    Parse { what: &'static str, text: String },
    #[error("schema file does not match matrix header")]
    SchemaMismatch,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
