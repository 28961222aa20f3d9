//! Subject-grouped cross-validation and sample-wise macro F1 scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{aggregate_variants, AugmentError, AugmentationMode};
use crate::features::{extract, FeatureError, FeatureMatrix, WindowPlan};
use crate::ingest::{ActivityLabel, IngestError, Recording, Vocabulary};
use crate::model::{GbdtConfig, GbdtModel, ModelError};
use crate::postprocess::{expand_to_samples, smooth, PostprocessError, ProbabilityMatrix, SmoothingConfig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{subjects} subjects cannot fill {folds} folds")]
    TooFewSubjects { subjects: usize, folds: usize },
    #[error("truth has {truth} samples, prediction has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("recording {0} has no labels")]
    MissingLabels(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Postprocess(#[from] PostprocessError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Subject to fold map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_count: usize,
    pub folds: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, subject: &str) -> Option<usize> {
        self.folds.get(subject).copied()
    }

    pub fn subjects_in(&self, fold: usize) -> Vec<&str> {
        self.folds
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in self.folds.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles the distinct subjects with `seed` and deals them round-robin
/// into `k` folds.
pub fn grouped_kfold<S: AsRef<str>>(subjects: &[S], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    let mut distinct: Vec<&str> = subjects.iter().map(AsRef::as_ref).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if k == 0 || distinct.len() < k {
        return Err(EvalError::TooFewSubjects {
            subjects: distinct.len(),
            folds: k,
        });
    }
    distinct.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(FoldAssignment {
        fold_count: k,
        folds: distinct
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s.to_string(), i % k))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    /// `None` for classes with no true or predicted samples.
    pub per_class_f1: Vec<Option<f64>>,
    /// `confusion[truth][pred]`.
    pub confusion: Vec<Vec<u64>>,
    pub per_subject_macro_f1: BTreeMap<String, f64>,
}

impl EvalReport {
    fn from_confusion(confusion: Vec<Vec<u64>>) -> EvalReport {
        let k = confusion.len();
        let per_class_f1: Vec<Option<f64>> = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let fn_ = confusion[c].iter().sum::<u64>() - tp;
                let fp = (0..k).map(|t| confusion[t][c]).sum::<u64>() - tp;
                (tp + fp + fn_ > 0).then(|| 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
            })
            .collect();
        let included: Vec<f64> = per_class_f1.iter().flatten().copied().collect();
        let macro_f1 = if included.is_empty() {
            0.0
        } else {
            included.iter().sum::<f64>() / included.len() as f64
        };
        EvalReport {
            macro_f1,
            per_class_f1,
            confusion,
            per_subject_macro_f1: BTreeMap::new(),
        }
    }

    pub fn n_samples(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Human-readable summary.
    pub fn to_text(&self, vocab: Option<&Vocabulary>) -> String {
        let name = |c: usize| {
            vocab
                .and_then(|v| v.name(ActivityLabel(c as u16)))
                .map(str::to_string)
                .unwrap_or_else(|| format!("class_{c}"))
        };
        let mut out = String::new();
        let _ = writeln!(out, "macro_f1 {:.6}", self.macro_f1);
        let _ = writeln!(out, "samples {}", self.n_samples());
        for (c, f1) in self.per_class_f1.iter().enumerate() {
            match f1 {
                Some(v) => writeln!(out, "class {} {:.6}", name(c), v),
                None => writeln!(out, "class {} excluded", name(c)),
            }
            .ok();
        }
        for (s, f1) in &self.per_subject_macro_f1 {
            let _ = writeln!(out, "subject {s} {f1:.6}");
        }
        out
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Confusion matrix as CSV, first column the true class.
    pub fn write_confusion_csv<W: Write>(&self, vocab: Option<&Vocabulary>, out: W) -> Result<(), EvalError> {
        let name = |c: usize| {
            vocab
                .and_then(|v| v.name(ActivityLabel(c as u16)))
                .map(str::to_string)
                .unwrap_or_else(|| c.to_string())
        };
        let k = self.confusion.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["truth".to_string()];
        header.extend((0..k).map(name));
        w.write_record(&header)?;
        for (t, row) in self.confusion.iter().enumerate() {
            let mut record = vec![name(t)];
            record.extend(row.iter().map(u64::to_string));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn confusion(truth: &[ActivityLabel], pred: &[ActivityLabel], n_classes: usize) -> Result<Vec<Vec<u64>>, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    let k = truth
        .iter()
        .chain(pred)
        .map(|l| l.index() + 1)
        .max()
        .unwrap_or(0)
        .max(n_classes);
    let mut m = vec![vec![0u64; k]; k];
    for (t, p) in truth.iter().zip(pred) {
        m[t.index()][p.index()] += 1;
    }
    Ok(m)
}

/// Per-class `F1 = 2TP / (2TP + FP + FN)` and their mean over classes that
/// occur in either sequence. Scores 0 when both are empty.
pub fn macro_f1(truth: &[ActivityLabel], pred: &[ActivityLabel], n_classes: usize) -> Result<EvalReport, EvalError> {
    Ok(EvalReport::from_confusion(confusion(truth, pred, n_classes)?))
}

/// One report over the pooled samples of several subjects, plus each
/// subject's own macro F1.
pub fn pooled_report(
    parts: &[(&str, &[ActivityLabel], &[ActivityLabel])],
    n_classes: usize,
) -> Result<EvalReport, EvalError> {
    let mut total = vec![vec![0u64; n_classes]; n_classes];
    let mut per_subject: BTreeMap<String, Vec<Vec<u64>>> = BTreeMap::new();
    for &(subject, truth, pred) in parts {
        let c = confusion(truth, pred, n_classes)?;
        merge(&mut total, &c);
        merge(per_subject.entry(subject.to_string()).or_default(), &c);
    }
    let mut report = EvalReport::from_confusion(total);
    report.per_subject_macro_f1 = per_subject
        .into_iter()
        .map(|(s, c)| (s, EvalReport::from_confusion(c).macro_f1))
        .collect();
    Ok(report)
}

fn merge(into: &mut Vec<Vec<u64>>, from: &[Vec<u64>]) {
    let k = into.len().max(from.len());
    into.resize(k, Vec::new());
    for row in into.iter_mut() {
        row.resize(k, 0);
    }
    for (t, row) in from.iter().enumerate() {
        for (p, &v) in row.iter().enumerate() {
            into[t][p] += v;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub mode: AugmentationMode,
    pub plan: WindowPlan,
    pub gbdt: GbdtConfig,
    pub smoothing: SmoothingConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 3,
            seed: 0,
            mode: AugmentationMode::Raw,
            plan: WindowPlan::default(),
            gbdt: GbdtConfig::default(),
            smoothing: SmoothingConfig::default(),
        }
    }
}

/// One recording prepared for cross-validation.
#[derive(Clone, Debug)]
pub struct CvInput {
    pub subject: String,
    /// Base extraction for the mode's channel configuration, with labels.
    pub features: FeatureMatrix,
    /// Ground truth at the sample rate.
    pub sample_labels: Vec<ActivityLabel>,
    pub sample_rate_hz: u32,
}

impl CvInput {
    pub fn from_recording(rec: &Recording, plan: &WindowPlan, mode: AugmentationMode) -> Result<CvInput, EvalError> {
        let sample_labels = rec
            .labels()
            .ok_or_else(|| EvalError::MissingLabels(rec.subject_id.clone()))?
            .to_vec();
        Ok(CvInput {
            subject: rec.subject_id.clone(),
            features: extract(rec, plan, mode.channel_config()),
            sample_labels,
            sample_rate_hz: rec.sample_rate_hz,
        })
    }
}

/// Out-of-fold predictions of one recording.
#[derive(Clone, Debug)]
pub struct OutOfFold {
    pub subject: String,
    pub fold: usize,
    /// Per-timestep probabilities, variants already voted.
    pub probs: ProbabilityMatrix,
    pub timestep_pred: Vec<ActivityLabel>,
    pub timestep_pred_smoothed: Vec<ActivityLabel>,
    pub sample_pred: Vec<ActivityLabel>,
    pub sample_pred_smoothed: Vec<ActivityLabel>,
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub assignment: FoldAssignment,
    pub models: Vec<GbdtModel>,
    pub out_of_fold: Vec<OutOfFold>,
    /// Sample-wise, argmax of raw probabilities (`F1`).
    pub report: EvalReport,
    /// Sample-wise, argmax after smoothing (`F1_PP`).
    pub report_smoothed: EvalReport,
    /// Same as `report`, scored on timestep labels before expansion.
    pub timestep_report: EvalReport,
}

impl CvOutcome {
    pub fn f1(&self) -> f64 {
        self.report.macro_f1
    }

    pub fn f1_pp(&self) -> f64 {
        self.report_smoothed.macro_f1
    }
}

/// Extracts features and runs [`run_cv_on_features`].
pub fn run_cv(recordings: &[Recording], n_classes: usize, cfg: &CvConfig) -> Result<CvOutcome, EvalError> {
    let inputs = recordings
        .iter()
        .map(|r| CvInput::from_recording(r, &cfg.plan, cfg.mode))
        .collect::<Result<Vec<_>, _>>()?;
    run_cv_on_features(&inputs, n_classes, cfg)
}

/// Grouped k-fold over precomputed base features: one model per fold,
/// trained on the augmented rows of the other folds, evaluated on its own
/// subjects with augmented variants soft-voted back to one row per timestep.
pub fn run_cv_on_features(inputs: &[CvInput], n_classes: usize, cfg: &CvConfig) -> Result<CvOutcome, EvalError> {
    let subjects: Vec<&str> = inputs.iter().map(|i| i.subject.as_str()).collect();
    let assignment = grouped_kfold(&subjects, cfg.folds, cfg.seed)?;
    let augmented = inputs
        .iter()
        .map(|i| {
            if i.features.labels().is_none() {
                return Err(EvalError::MissingLabels(i.subject.clone()));
            }
            Ok(cfg.mode.apply(&i.features)?)
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let fold_of: Vec<usize> = inputs
        .iter()
        .map(|i| assignment.fold_of(&i.subject).expect("every subject is assigned"))
        .collect();

    let mut models = Vec::with_capacity(cfg.folds);
    let mut probs: Vec<Option<ProbabilityMatrix>> = vec![None; inputs.len()];
    let gbdt = GbdtConfig {
        seed: cfg.seed,
        ..cfg.gbdt.clone()
    };
    for fold in 0..cfg.folds {
        let train: Vec<&FeatureMatrix> = augmented
            .iter()
            .zip(&fold_of)
            .filter(|(_, &f)| f != fold)
            .map(|(m, _)| m)
            .collect();
        let train = FeatureMatrix::concat(&train)?;
        let model = GbdtModel::fit(&train, n_classes, &gbdt)?;
        drop(train);
        for (i, m) in augmented.iter().enumerate() {
            if fold_of[i] == fold {
                let p = model.predict_proba(m)?;
                probs[i] = Some(if cfg.mode.is_row_augmenting() { aggregate_variants(&p)? } else { p });
            }
        }
        models.push(model);
    }

    let mut out_of_fold = Vec::with_capacity(inputs.len());
    for ((input, p), fold) in inputs.iter().zip(probs).zip(&fold_of) {
        let p = p.expect("every recording is predicted once");
        let stride = cfg.plan.stride_s;
        let n = input.sample_labels.len();
        let rate = input.sample_rate_hz;
        let timestep_pred = p.argmax();
        let timestep_pred_smoothed = smooth(&p, &cfg.smoothing).argmax();
        out_of_fold.push(OutOfFold {
            subject: input.subject.clone(),
            fold: *fold,
            sample_pred: expand_to_samples(&timestep_pred, n, rate, stride)?,
            sample_pred_smoothed: expand_to_samples(&timestep_pred_smoothed, n, rate, stride)?,
            probs: p,
            timestep_pred,
            timestep_pred_smoothed,
        });
    }

    let sample_parts: Vec<_> = inputs
        .iter()
        .zip(&out_of_fold)
        .map(|(i, o)| (i.subject.as_str(), i.sample_labels.as_slice(), o.sample_pred.as_slice()))
        .collect();
    let report = pooled_report(&sample_parts, n_classes)?;
    let smoothed_parts: Vec<_> = inputs
        .iter()
        .zip(&out_of_fold)
        .map(|(i, o)| (i.subject.as_str(), i.sample_labels.as_slice(), o.sample_pred_smoothed.as_slice()))
        .collect();
    let report_smoothed = pooled_report(&smoothed_parts, n_classes)?;
    let timestep_parts: Vec<_> = inputs
        .iter()
        .zip(&out_of_fold)
        .map(|(i, o)| {
            (
                i.subject.as_str(),
                i.features.labels().expect("checked above"),
                o.timestep_pred.as_slice(),
            )
        })
        .collect();
    let timestep_report = pooled_report(&timestep_parts, n_classes)?;
    Ok(CvOutcome {
        assignment,
        models,
        out_of_fold,
        report,
        report_smoothed,
        timestep_report,
    })
}

/// Reads `sample_index,label_name` prediction files.
pub fn read_sample_predictions(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Vec<ActivityLabel>, EvalError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for record in r.records() {
        let record = record?;
        let name = record.get(1).unwrap_or("");
        out.push(vocab.label(name).ok_or_else(|| EvalError::UnknownLabel(name.to_string()))?);
    }
    Ok(out)
}
