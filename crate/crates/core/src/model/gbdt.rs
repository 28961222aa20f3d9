use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::BinnedMatrix;
use super::tree::{GrowParams, Grower, Tree};
use super::{compute_class_weights, ClassWeighting, Classifier, GbdtConfig, ModelError};
use crate::features::FeatureMatrix;
use crate::postprocess::ProbabilityMatrix;

/// Fitted softmax booster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    config: GbdtConfig,
    n_classes: usize,
    schema_hash: String,
    class_weights: Vec<f64>,
    bin_edges: Vec<Vec<f64>>,
    /// `trees[iteration][class]`.
    trees: Vec<Vec<Tree>>,
}

struct ClassState {
    grower: Grower,
    gh: Vec<[f64; 2]>,
    delta: Vec<f64>,
}

fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (s - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn weighted_log_loss(probs: &[f64], k: usize, labels: &[usize], weights: &[f64]) -> f64 {
    labels
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (&y, &w))| -w * probs[i * k + y].max(f64::MIN_POSITIVE).ln())
        .sum()
}

impl GbdtModel {
    pub fn fit(m: &FeatureMatrix, n_classes: usize, cfg: &GbdtConfig) -> Result<GbdtModel, ModelError> {
        Self::fit_with_trace(m, n_classes, cfg).map(|(model, _)| model)
    }

    /// Fits and also returns the weighted training cross-entropy before the
    /// first iteration and after each one (`iterations + 1` values).
    pub fn fit_with_trace(
        m: &FeatureMatrix,
        n_classes: usize,
        cfg: &GbdtConfig,
    ) -> Result<(GbdtModel, Vec<f64>), ModelError> {
        cfg.validate()?;
        let labels = m.labels().filter(|l| !l.is_empty()).ok_or(ModelError::EmptyLabels)?;
        let balanced = compute_class_weights(labels, n_classes)?;
        let present = balanced.iter().filter(|&&w| w > 0.0).count();
        if present < 2 {
            return Err(ModelError::SingleClass(present));
        }
        let class_weights = match cfg.class_weighting {
            ClassWeighting::Balanced => balanced,
            ClassWeighting::None => balanced.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect(),
        };
        let y: Vec<usize> = labels.iter().map(|l| l.index()).collect();
        let total: f64 = y.iter().map(|&c| class_weights[c]).sum();
        let weights: Vec<f64> = y.iter().map(|&c| class_weights[c] / total).collect();

        let n = m.n_rows();
        let k = n_classes;
        let binned = BinnedMatrix::fit(m, cfg.histogram_bins, cfg.seed);
        let params = GrowParams {
            max_depth: cfg.max_depth,
            l2_rel: cfg.l2_reg,
            min_child_rel: cfg.min_child_hessian,
            learning_rate: cfg.learning_rate,
        };
        let mut scores = vec![0.0; n * k];
        let mut probs = vec![0.0; n * k];
        let mut states: Vec<ClassState> = (0..k)
            .map(|_| ClassState {
                grower: Grower::default(),
                gh: vec![[0.0; 2]; n],
                delta: vec![0.0; n],
            })
            .collect();
        let mut trees = Vec::with_capacity(cfg.iterations);
        let mut trace = Vec::with_capacity(cfg.iterations + 1);
        let refresh = |scores: &[f64], probs: &mut [f64]| {
            probs
                .par_chunks_mut(k)
                .zip(scores.par_chunks(k))
                .for_each(|(p, s)| softmax_into(s, p));
        };
        refresh(&scores, &mut probs);
        trace.push(weighted_log_loss(&probs, k, &y, &weights));

        for _ in 0..cfg.iterations {
            let iteration: Vec<Tree> = states
                .par_iter_mut()
                .enumerate()
                .map(|(c, st)| {
                    for i in 0..n {
                        let p = probs[i * k + c];
                        let target = (y[i] == c) as u8 as f64;
                        let w = weights[i];
                        st.gh[i] = [w * (p - target), w * (p * (1.0 - p)).max(1e-16)];
                    }
                    st.grower.grow(&binned, &st.gh, params, &mut st.delta)
                })
                .collect();
            for (c, st) in states.iter().enumerate() {
                for (i, d) in st.delta.iter().enumerate() {
                    scores[i * k + c] += d;
                }
            }
            trees.push(iteration);
            refresh(&scores, &mut probs);
            trace.push(weighted_log_loss(&probs, k, &y, &weights));
        }

        let model = GbdtModel {
            config: cfg.clone(),
            n_classes,
            schema_hash: m.schema_hash(),
            class_weights,
            bin_edges: binned.into_edges(),
            trees,
        };
        Ok((model, trace))
    }

    pub fn config(&self) -> &GbdtConfig {
        &self.config
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn schema_hash(&self) -> &str {
        &self.schema_hash
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn bin_edges(&self) -> &[Vec<f64>] {
        &self.bin_edges
    }

    pub fn trees(&self) -> &[Vec<Tree>] {
        &self.trees
    }

    pub fn iterations(&self) -> usize {
        self.trees.len()
    }

    /// The model after its first `iterations` rounds.
    pub fn truncated(&self, iterations: usize) -> GbdtModel {
        GbdtModel {
            trees: self.trees[..iterations.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }

    /// Raw per-class boosted scores of one feature row.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for iteration in &self.trees {
            for (acc, tree) in s.iter_mut().zip(iteration) {
                *acc += tree.predict_row(row);
            }
        }
        s
    }

    pub fn predict_proba(&self, m: &FeatureMatrix) -> Result<ProbabilityMatrix, ModelError> {
        let got = m.schema_hash();
        if got != self.schema_hash {
            return Err(ModelError::SchemaMismatch {
                expected: self.schema_hash.clone(),
                got,
            });
        }
        let k = self.n_classes;
        let mut values = vec![0.0; m.n_rows() * k];
        values.par_chunks_mut(k).enumerate().for_each(|(i, out)| {
            softmax_into(&self.scores(m.row(i)), out);
        });
        Ok(ProbabilityMatrix::new(m.rows().to_vec(), k, values).expect("consistent shape"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GbdtModel, ModelError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

impl Classifier for GbdtModel {
    type Config = GbdtConfig;

    fn fit(m: &FeatureMatrix, n_classes: usize, cfg: &GbdtConfig) -> Result<Self, ModelError> {
        GbdtModel::fit(m, n_classes, cfg)
    }

    fn predict_proba(&self, m: &FeatureMatrix) -> Result<ProbabilityMatrix, ModelError> {
        GbdtModel::predict_proba(self, m)
    }

    fn save(&self, path: &Path) -> Result<(), ModelError> {
        GbdtModel::save(self, path)
    }

    fn load(path: &Path) -> Result<Self, ModelError> {
        GbdtModel::load(path)
    }
}
