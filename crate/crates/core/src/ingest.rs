//! Recording ingestion, mirror-limb imputation and orientation auditing.
//!
//! A recording is one subject's untrimmed session: four wrist/ankle wearables,
//! three acceleration axes each, sampled at 50 Hz, with optional per-sample
//! activity labels. Files follow the public WEAR CSV layout:
//!
//! ```text
//! sbj_id,right_arm_acc_x,right_arm_acc_y,...,left_leg_acc_z,label
//! ```
//!
//! Blank or unparseable acceleration cells are kept as a per-limb missing mask
//! instead of being dropped.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sample rate of WEAR-format input.
pub const SAMPLE_RATE_HZ: u32 = 50;

/// Accelerometer range in g; values outside are treated as corrupt.
pub const ACC_RANGE_G: f64 = 8.0;

/// Centered rolling-median window used for the orientation trace.
pub const TRACE_WINDOW_S: f64 = 120.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("label `{0}` is not in the vocabulary")]
    LabelNotInVocabulary(String),
    #[error("recording `{0}` has no rows")]
    EmptyRecording(String),
    #[error("channel length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
}

/// Wearable position. Declaration order is the canonical channel order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LimbId {
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Upper,
    Lower,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Upper => "arm",
            Level::Lower => "leg",
        }
    }
}

impl LimbId {
    pub const ALL: [LimbId; 4] = [
        LimbId::LeftArm,
        LimbId::RightArm,
        LimbId::LeftLeg,
        LimbId::RightLeg,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn mirror(self) -> LimbId {
        match self {
            LimbId::LeftArm => LimbId::RightArm,
            LimbId::RightArm => LimbId::LeftArm,
            LimbId::LeftLeg => LimbId::RightLeg,
            LimbId::RightLeg => LimbId::LeftLeg,
        }
    }

    pub fn level(self) -> Level {
        match self {
            LimbId::LeftArm | LimbId::RightArm => Level::Upper,
            LimbId::LeftLeg | LimbId::RightLeg => Level::Lower,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimbId::LeftArm => "left_arm",
            LimbId::RightArm => "right_arm",
            LimbId::LeftLeg => "left_leg",
            LimbId::RightLeg => "right_leg",
        }
    }

    pub fn from_name(name: &str) -> Option<LimbId> {
        LimbId::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl fmt::Display for LimbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn from_name(name: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Column name of one acceleration channel in the recording CSV.
pub fn channel_column(limb: LimbId, axis: Axis) -> String {
    format!("{}_acc_{}", limb.name(), axis.name())
}

/// Class index into a [`Vocabulary`]. Index 0 is always `null`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActivityLabel(pub u16);

impl ActivityLabel {
    pub const NULL: ActivityLabel = ActivityLabel(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_null(self) -> bool {
        self.0 == 0
    }
}

/// The 18 WEAR workout activities, in class-index order after `null`.
pub const WEAR_ACTIVITIES: [&str; 18] = [
    "jogging",
    "jogging (rotating arms)",
    "jogging (skipping)",
    "jogging (sidesteps)",
    "jogging (butt-kicks)",
    "stretching (triceps)",
    "stretching (lunging)",
    "stretching (shoulders)",
    "stretching (hamstrings)",
    "stretching (lumbar rotation)",
    "push-ups",
    "push-ups (complex)",
    "sit-ups",
    "sit-ups (complex)",
    "burpees",
    "lunges",
    "lunges (complex)",
    "bench-dips",
];

/// Bijection between class names and indices; line 1 of the file is `null`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, u16>,
}

impl Vocabulary {
    pub fn from_names<I, S>(names: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.first().map(String::as_str) != Some("null") {
            return Err(IngestError::InvalidVocabulary(
                "first class must be `null`".into(),
            ));
        }
        if names.len() > u16::MAX as usize {
            return Err(IngestError::InvalidVocabulary("too many classes".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i as u16).is_some() {
                return Err(IngestError::InvalidVocabulary(format!(
                    "duplicate class `{name}`"
                )));
            }
        }
        Ok(Vocabulary { names, index })
    }

    /// The full 19-class WEAR vocabulary.
    pub fn wear() -> Self {
        Self::first_activities(WEAR_ACTIVITIES.len())
    }

    /// `null` plus the first `n` WEAR activities.
    pub fn first_activities(n: usize) -> Self {
        let names = std::iter::once("null").chain(WEAR_ACTIVITIES.iter().copied().take(n));
        Self::from_names(names).expect("static vocabulary is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let text = fs::read_to_string(path)?;
        Self::from_names(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, label: ActivityLabel) -> Option<&str> {
        self.names.get(label.index()).map(String::as_str)
    }

    pub fn label(&self, name: &str) -> Option<ActivityLabel> {
        self.index.get(name).copied().map(ActivityLabel)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// One subject's session: 4 limbs x 3 axes of acceleration plus optional labels.
///
/// Missing samples are stored as NaN; a limb is masked at an index whenever
/// any of its three axes is missing there.
#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub sample_rate_hz: u32,
    channels: [[Vec<f64>; 3]; 4],
    labels: Option<Vec<ActivityLabel>>,
    missing: [Vec<bool>; 4],
}

impl Recording {
    /// Builds a recording from per-limb, per-axis sample arrays indexed by
    /// [`LimbId::index`] and [`Axis::index`]. Non-finite or out-of-range
    /// samples become missing.
    pub fn new(
        subject_id: impl Into<String>,
        mut channels: [[Vec<f64>; 3]; 4],
        labels: Option<Vec<ActivityLabel>>,
    ) -> Result<Self, IngestError> {
        let n = channels[0][0].len();
        for limb in &channels {
            for axis in limb {
                if axis.len() != n {
                    return Err(IngestError::LengthMismatch {
                        expected: n,
                        got: axis.len(),
                    });
                }
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(IngestError::LengthMismatch {
                    expected: n,
                    got: labels.len(),
                });
            }
        }
        let mut missing: [Vec<bool>; 4] = Default::default();
        for (limb, mask) in channels.iter_mut().zip(missing.iter_mut()) {
            *mask = vec![false; n];
            for axis in limb.iter_mut() {
                for (v, m) in axis.iter_mut().zip(mask.iter_mut()) {
                    if !v.is_finite() || v.abs() > ACC_RANGE_G {
                        *v = f64::NAN;
                        *m = true;
                    }
                }
            }
        }
        Ok(Recording {
            subject_id: subject_id.into(),
            sample_rate_hz: SAMPLE_RATE_HZ,
            channels,
            labels,
            missing,
        })
    }

    pub fn len(&self) -> usize {
        self.channels[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn channel(&self, limb: LimbId, axis: Axis) -> &[f64] {
        &self.channels[limb.index()][axis.index()]
    }

    pub fn labels(&self) -> Option<&[ActivityLabel]> {
        self.labels.as_deref()
    }

    pub fn missing_mask(&self, limb: LimbId) -> &[bool] {
        &self.missing[limb.index()]
    }

    pub fn missing_count(&self, limb: LimbId) -> usize {
        self.missing[limb.index()].iter().filter(|&&m| m).count()
    }

    pub fn with_labels(mut self, labels: Option<Vec<ActivityLabel>>) -> Result<Self, IngestError> {
        if let Some(l) = &labels {
            if l.len() != self.len() {
                return Err(IngestError::LengthMismatch {
                    expected: self.len(),
                    got: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Consumes the recording, returning its raw channel arrays.
    pub fn into_channels(self) -> [[Vec<f64>; 3]; 4] {
        self.channels
    }
}

fn parse_sample(cell: &str) -> f64 {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v.abs() <= ACC_RANGE_G => v,
        _ => f64::NAN,
    }
}

/// Reads one WEAR-format CSV recording.
pub fn load_recording(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Recording, IngestError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);

    let mut columns = [[0usize; 3]; 4];
    for limb in LimbId::ALL {
        for axis in Axis::ALL {
            let name = channel_column(limb, axis);
            columns[limb.index()][axis.index()] =
                find(&name).ok_or(IngestError::MissingColumn(name))?;
        }
    }
    let label_col = find("label");
    let subject_col = find("sbj_id");

    let mut channels: [[Vec<f64>; 3]; 4] = Default::default();
    let mut labels = label_col.map(|_| Vec::new());
    let mut subject_id = None;
    for record in reader.records() {
        let record = record?;
        for limb in LimbId::ALL {
            for axis in Axis::ALL {
                let cell = record.get(columns[limb.index()][axis.index()]).unwrap_or("");
                channels[limb.index()][axis.index()].push(parse_sample(cell));
            }
        }
        if let (Some(col), Some(labels)) = (label_col, labels.as_mut()) {
            let name = record.get(col).unwrap_or("").trim();
            let label = vocab
                .label(name)
                .ok_or_else(|| IngestError::LabelNotInVocabulary(name.to_string()))?;
            labels.push(label);
        }
        if subject_id.is_none() {
            if let Some(col) = subject_col {
                subject_id = record.get(col).map(|s| s.trim().to_string());
            }
        }
    }
    if channels[0][0].is_empty() {
        return Err(IngestError::EmptyRecording(path.display().to_string()));
    }
    let subject_id = subject_id.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    Recording::new(subject_id, channels, labels)
}

/// Writes a recording in the layout read by [`load_recording`]. Missing
/// samples become blank cells.
pub fn write_recording(
    rec: &Recording,
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["sbj_id".to_string()];
    let order = [
        LimbId::RightArm,
        LimbId::LeftArm,
        LimbId::RightLeg,
        LimbId::LeftLeg,
    ];
    for limb in order {
        for axis in Axis::ALL {
            header.push(channel_column(limb, axis));
        }
    }
    if rec.labels().is_some() {
        header.push("label".into());
    }
    writer.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..rec.len() {
        row.clear();
        row.push(rec.subject_id.clone());
        for limb in order {
            for axis in Axis::ALL {
                let v = rec.channel(limb, axis)[i];
                row.push(if v.is_nan() { String::new() } else { v.to_string() });
            }
        }
        if let Some(labels) = rec.labels() {
            let name = vocab
                .name(labels[i])
                .ok_or_else(|| IngestError::LabelNotInVocabulary(labels[i].0.to_string()))?;
            row.push(name.to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Result of [`impute_mirror_limb`].
#[derive(Clone, Debug)]
pub struct Imputation {
    pub recording: Recording,
    /// Indices where both the limb and its mirror are missing; these stay masked.
    pub both_sides_missing: Vec<usize>,
}

/// Fills every missing sample of `limb` with the concurrent sample of its mirror.
pub fn impute_mirror_limb(rec: &Recording, limb: LimbId) -> Imputation {
    let mut out = rec.clone();
    let mirror = limb.mirror();
    let mut unresolved = Vec::new();
    for i in 0..rec.len() {
        if !rec.missing[limb.index()][i] {
            continue;
        }
        if rec.missing[mirror.index()][i] {
            unresolved.push(i);
            continue;
        }
        for axis in Axis::ALL {
            out.channels[limb.index()][axis.index()][i] = rec.channels[mirror.index()][axis.index()][i];
        }
        out.missing[limb.index()][i] = false;
    }
    Imputation {
        recording: out,
        both_sides_missing: unresolved,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Half {
    First,
    Second,
}

impl Half {
    pub fn name(self) -> &'static str {
        match self {
            Half::First => "first",
            Half::Second => "second",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrientationEntry {
    pub limb: LimbId,
    pub half: Half,
    pub median_x: f64,
    pub flagged: bool,
    /// Rolling median of x at 1 Hz, only filled when requested.
    pub rolling_median_trace: Option<Vec<f64>>,
    sample_count: usize,
}

/// Per-recording orientation audit: 4 limbs x 2 halves.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationReport {
    pub subject_id: String,
    pub entries: Vec<OrientationEntry>,
}

impl OrientationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &OrientationEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AuditOptions {
    pub with_trace: bool,
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lo, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Some(upper)
    } else {
        let lower = lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(0.5 * (lower + upper))
    }
}

fn rolling_median_trace(x: &[f64], rate: u32) -> Vec<f64> {
    let rate = rate as usize;
    let half = (TRACE_WINDOW_S as usize * rate) / 2;
    let seconds = x.len().div_ceil(rate);
    let mut buf = Vec::with_capacity(2 * half);
    (0..seconds)
        .map(|s| {
            let center = s * rate;
            let lo = center.saturating_sub(half);
            let hi = (center + half).min(x.len());
            buf.clear();
            buf.extend(x[lo..hi].iter().copied().filter(|v| !v.is_nan()));
            median(&mut buf).unwrap_or(f64::NAN)
        })
        .collect()
}

/// Audits the sign of the x-axis (gravity-aligned) median per limb and
/// recording half, flagging halves whose sign disagrees with the cohort's
/// modal sign for that limb.
pub fn audit_orientation(cohort: &[Recording], opts: AuditOptions) -> Vec<OrientationReport> {
    let mut reports: Vec<OrientationReport> = cohort
        .iter()
        .map(|rec| {
            let mid = rec.len() / 2;
            let mut entries = Vec::with_capacity(8);
            for limb in LimbId::ALL {
                let x = rec.channel(limb, Axis::X);
                for (half, range) in [(Half::First, 0..mid), (Half::Second, mid..rec.len())] {
                    let mut values: Vec<f64> =
                        x[range.clone()].iter().copied().filter(|v| !v.is_nan()).collect();
                    let sample_count = values.len();
                    let median_x = median(&mut values).unwrap_or(0.0);
                    let rolling_median_trace = opts
                        .with_trace
                        .then(|| rolling_median_trace(&x[range], rec.sample_rate_hz));
                    entries.push(OrientationEntry {
                        limb,
                        half,
                        median_x,
                        flagged: false,
                        rolling_median_trace,
                        sample_count,
                    });
                }
            }
            OrientationReport {
                subject_id: rec.subject_id.clone(),
                entries,
            }
        })
        .collect();

    for limb in LimbId::ALL {
        let (mut pos, mut neg) = (0usize, 0usize);
        for e in reports.iter().flat_map(|r| &r.entries) {
            if e.limb == limb && e.sample_count > 0 {
                if e.median_x >= 0.0 {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
        }
        // ties resolve to +1
        let modal_positive = pos >= neg;
        for e in reports.iter_mut().flat_map(|r| r.entries.iter_mut()) {
            if e.limb == limb && e.sample_count > 0 {
                e.flagged = (e.median_x >= 0.0) != modal_positive;
            }
        }
    }
    reports
}

/// Serializes audit results as `subject,limb,half,median_x,flagged`.
pub fn write_orientation_csv<W: Write>(reports: &[OrientationReport], out: W) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["subject", "limb", "half", "median_x", "flagged"])?;
    for report in reports {
        for e in &report.entries {
            writer.write_record([
                report.subject_id.as_str(),
                e.limb.name(),
                e.half.name(),
                &e.median_x.to_string(),
                if e.flagged { "true" } else { "false" },
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Loads every `*.csv` recording under `dir` in file-name order.
pub fn load_dir(dir: impl AsRef<Path>, vocab: &Vocabulary) -> Result<Vec<Recording>, IngestError> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_recording(p, vocab)).collect()
}
