//! Prediction refinement: fold voting, temporal smoothing, rule-based
//! boosting of underrepresented activities and expansion to sample rate.
//!
//! Pipeline order: per-fold probabilities -> [`kfold_vote`] -> [`smooth`] ->
//! [`ProbabilityMatrix::argmax`] -> [`rule_boost`] -> [`expand_to_samples`].

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::RowId;
use crate::ingest::{ActivityLabel, Vocabulary};

#[derive(Debug, Error)]
pub enum PostprocessError {
    #[error("fold predictions are not aligned")]
    MisalignedFolds,
    #[error("no predictions to expand")]
    EmptyPredictions,
    #[error("probability shape mismatch: {rows} rows x {classes} classes vs {values} values")]
    Shape {
        rows: usize,
        classes: usize,
        values: usize,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-timestep class probabilities (or per-fold sums before normalization).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMatrix {
    rows: Vec<RowId>,
    n_classes: usize,
    values: Vec<f64>,
}

impl ProbabilityMatrix {
    pub fn new(rows: Vec<RowId>, n_classes: usize, values: Vec<f64>) -> Result<Self, PostprocessError> {
        if rows.len() * n_classes != values.len() {
            return Err(PostprocessError::Shape {
                rows: rows.len(),
                classes: n_classes,
                values: values.len(),
            });
        }
        Ok(ProbabilityMatrix {
            rows,
            n_classes,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn rows(&self) -> &[RowId] {
        &self.rows
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_classes..(i + 1) * self.n_classes]
    }

    /// Most probable class per row; ties go to the lower class index.
    pub fn argmax(&self) -> Vec<ActivityLabel> {
        (0..self.n_rows())
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for (c, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = c;
                    }
                }
                ActivityLabel(best as u16)
            })
            .collect()
    }

    /// Each row divided by its sum (rows summing to zero are left as is).
    pub fn normalized(&self) -> ProbabilityMatrix {
        let mut out = self.clone();
        for row in out.values.chunks_mut(self.n_classes.max(1)) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        out
    }

    /// Rows of one recording, in stored order.
    pub fn filter_recording(&self, recording: &str) -> ProbabilityMatrix {
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if &*r.recording == recording {
                rows.push(r.clone());
                values.extend_from_slice(self.row(i));
            }
        }
        ProbabilityMatrix {
            rows,
            n_classes: self.n_classes,
            values,
        }
    }

    /// Contiguous row ranges that share a recording id.
    fn recording_blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || self.rows[i].recording != self.rows[start].recording {
                if i > start {
                    blocks.push(start..i);
                }
                start = i;
            }
        }
        blocks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub half_width_steps: usize,
    pub sigma: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            half_width_steps: 10,
            sigma: 6.0,
        }
    }
}

impl SmoothingConfig {
    /// Unit-sum Gaussian weights for offsets `-half_width..=half_width`.
    pub fn kernel(&self) -> Vec<f64> {
        let hw = self.half_width_steps as i64;
        let raw: Vec<f64> = (-hw..=hw)
            .map(|k| (-((k * k) as f64) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleBoostConfig {
    /// Every activity is expected to be present at least this long.
    pub min_presence_s: f64,
    /// A timestep is a candidate when the class holds at least this probability.
    pub candidate_prob_floor: f64,
    /// Shortest candidate run that gets relabeled.
    pub min_region_s: f64,
}

impl Default for RuleBoostConfig {
    fn default() -> Self {
        RuleBoostConfig {
            min_presence_s: 50.0,
            candidate_prob_floor: 0.2,
            min_region_s: 30.0,
        }
    }
}

/// Sums aligned per-fold probability matrices and renormalizes each row.
///
/// Per-element sums are taken over the sorted fold values so the result does
/// not depend on fold order.
pub fn kfold_vote(per_fold: &[ProbabilityMatrix]) -> Result<ProbabilityMatrix, PostprocessError> {
    let first = per_fold.first().ok_or(PostprocessError::MisalignedFolds)?;
    if per_fold
        .iter()
        .any(|p| p.n_classes != first.n_classes || p.rows != first.rows)
    {
        return Err(PostprocessError::MisalignedFolds);
    }
    let mut scratch = vec![0.0; per_fold.len()];
    let values = (0..first.values.len())
        .map(|e| {
            for (s, p) in scratch.iter_mut().zip(per_fold) {
                *s = p.values[e];
            }
            scratch.sort_by(f64::total_cmp);
            scratch.iter().sum::<f64>()
        })
        .collect();
    let summed = ProbabilityMatrix {
        rows: first.rows.clone(),
        n_classes: first.n_classes,
        values,
    };
    Ok(summed.normalized())
}

/// Gaussian smoothing of each class probability over time, per recording.
///
/// The kernel is truncated at recording edges and the remaining weights are
/// renormalized, so constant sequences pass through unchanged.
pub fn smooth(probs: &ProbabilityMatrix, cfg: &SmoothingConfig) -> ProbabilityMatrix {
    let kernel = cfg.kernel();
    let hw = cfg.half_width_steps as isize;
    let k = probs.n_classes;
    let mut values = vec![0.0; probs.values.len()];
    for block in probs.recording_blocks() {
        let len = block.len() as isize;
        for t in 0..len {
            let lo = (t - hw).max(0);
            let hi = (t + hw).min(len - 1);
            let mut wsum = 0.0;
            let out = &mut values[(block.start + t as usize) * k..][..k];
            for s in lo..=hi {
                let w = kernel[(s - t + hw) as usize];
                wsum += w;
                let row = probs.row(block.start + s as usize);
                for (o, &p) in out.iter_mut().zip(row) {
                    *o += w * p;
                }
            }
            out.iter_mut().for_each(|o| *o /= wsum);
        }
    }
    ProbabilityMatrix {
        rows: probs.rows.clone(),
        n_classes: k,
        values,
    }
}

/// Relabels long `null` stretches where an underrepresented activity holds
/// substantial probability.
///
/// `probs_summed` and `labels` must describe one recording in timestep order.
/// Classes are visited in ascending index order; each class assigned less
/// than `min_presence_s` in total takes over its longest run of `null`
/// timesteps where its normalized probability is at least
/// `candidate_prob_floor`, provided the run lasts `min_region_s`.
pub fn rule_boost(
    probs_summed: &ProbabilityMatrix,
    labels: &[ActivityLabel],
    cfg: &RuleBoostConfig,
    stride_s: f64,
) -> Vec<ActivityLabel> {
    let probs = probs_summed.normalized();
    let mut out = labels.to_vec();
    let n = out.len().min(probs.n_rows());
    for class in 1..probs.n_classes {
        let c = ActivityLabel(class as u16);
        let assigned = out.iter().filter(|&&l| l == c).count() as f64 * stride_s;
        if assigned >= cfg.min_presence_s {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        let mut run_start = None;
        for t in 0..=n {
            let candidate =
                t < n && out[t].is_null() && probs.row(t)[class] >= cfg.candidate_prob_floor;
            match (candidate, run_start) {
                (true, None) => run_start = Some(t),
                (false, Some(s)) => {
                    if best.is_none_or(|(bs, be)| t - s > be - bs) {
                        best = Some((s, t));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some((s, e)) = best {
            if (e - s) as f64 * stride_s >= cfg.min_region_s {
                out[s..e].iter_mut().for_each(|l| *l = c);
            }
        }
    }
    out
}

/// Maps per-timestep labels onto every sample: sample `i` takes the label of
/// the nearest timestep, ties going to the earlier one.
pub fn expand_to_samples(
    labels: &[ActivityLabel],
    n_samples: usize,
    rate_hz: u32,
    stride_s: f64,
) -> Result<Vec<ActivityLabel>, PostprocessError> {
    if labels.is_empty() {
        return Err(PostprocessError::EmptyPredictions);
    }
    let samples_per_step = stride_s * rate_hz as f64;
    Ok((0..n_samples)
        .map(|i| {
            let pos = i as f64 / samples_per_step;
            let mut j = pos.floor() as usize;
            if pos - j as f64 > 0.5 {
                j += 1;
            }
            labels[j.min(labels.len() - 1)]
        })
        .collect())
}

/// Writes `sample_index,label_name` rows.
pub fn write_sample_predictions<W: Write>(
    labels: &[ActivityLabel],
    vocab: &Vocabulary,
    out: W,
) -> Result<(), PostprocessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_index", "label_name"])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string().as_str(), vocab.name(*l).unwrap_or("null")])?;
    }
    w.flush()?;
    Ok(())
}
