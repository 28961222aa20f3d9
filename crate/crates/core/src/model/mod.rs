//! Multiclass gradient-boosted decision trees over quantile histograms.
//!
//! Softmax boosting: every iteration fits one depth-limited regression tree
//! per class to the weighted cross-entropy gradients. Features are bucketed
//! into at most `histogram_bins` quantile bins; missing values get their own
//! bucket and are routed at each split to whichever child gave the larger
//! training gain.

mod binning;
mod gbdt;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureMatrix;
use crate::ingest::ActivityLabel;
use crate::postprocess::ProbabilityMatrix;

pub use binning::{bin_edges, BinnedMatrix};
pub use gbdt::GbdtModel;
pub use tree::{find_best_split, Node, SplitInfo, Tree};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature schema {got} does not match model schema {expected}")]
    SchemaMismatch { expected: String, got: String },
    #[error("training needs at least two classes, found {0}")]
    SingleClass(usize),
    #[error("no labels to train on")]
    EmptyLabels,
    #[error("label {0} is outside the {1}-class vocabulary")]
    LabelOutOfRange(u16, usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    /// `w_k = N / (K_present * n_k)`.
    Balanced,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtConfig {
    pub iterations: usize,
    pub max_depth: usize,
    pub histogram_bins: usize,
    pub class_weighting: ClassWeighting,
    pub learning_rate: f64,
    pub seed: u64,
    /// L2 leaf penalty, as a fraction of the tree's total hessian.
    pub l2_reg: f64,
    /// Smallest child hessian, as a fraction of the tree's total hessian.
    pub min_child_hessian: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            iterations: 1000,
            max_depth: 5,
            histogram_bins: 32,
            class_weighting: ClassWeighting::Balanced,
            learning_rate: 0.1,
            seed: 0,
            l2_reg: 1e-3,
            min_child_hessian: 1e-5,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if self.iterations < 1 {
            return bad("iterations must be >= 1");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be >= 1");
        }
        if !(2..=255).contains(&self.histogram_bins) {
            return bad("histogram_bins must be in 2..=255");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.l2_reg >= 0.0) || !(self.min_child_hessian >= 0.0) {
            return bad("regularization terms must be non-negative");
        }
        Ok(())
    }
}

/// Balanced class weights: `N / (K_present * n_k)` for present classes, 0 otherwise.
pub fn compute_class_weights(labels: &[ActivityLabel], n_classes: usize) -> Result<Vec<f64>, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptyLabels);
    }
    let mut counts = vec![0usize; n_classes];
    for l in labels {
        *counts
            .get_mut(l.index())
            .ok_or(ModelError::LabelOutOfRange(l.0, n_classes))? += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    let n = labels.len() as f64;
    Ok(counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { n / (present * c as f64) })
        .collect())
}

/// Backend-independent classifier surface used by the pipeline.
pub trait Classifier: Sized {
    type Config;

    fn fit(m: &FeatureMatrix, n_classes: usize, cfg: &Self::Config) -> Result<Self, ModelError>;
    fn predict_proba(&self, m: &FeatureMatrix) -> Result<ProbabilityMatrix, ModelError>;
    fn save(&self, path: &Path) -> Result<(), ModelError>;
    fn load(path: &Path) -> Result<Self, ModelError>;
}
