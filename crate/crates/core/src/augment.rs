//! Feature-space augmentation for multi-wearable setups.
//!
//! Three families operate on an extracted raw-axis [`FeatureMatrix`]:
//!
//! * rotation-invariant aggregation collapses the x/y/z value of each
//!   (limb, window, feature) group into symmetric statistics;
//! * LR-swapping duplicates every row with left/right limb blocks exchanged,
//!   for all four upper/lower combinations;
//! * UL-pairing builds one row per (arm, leg) pair with position-neutral
//!   column names, halving the row width.
//!
//! Expanded rows carry a [`VariantTag`]; at prediction time the per-variant
//! probabilities of a timestep are averaged by [`aggregate_variants`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    AggStat, Channel, ChannelConfig, FeatureColumnKey, FeatureError, FeatureMatrix, RowId,
};
use crate::ingest::{Axis, Level, LimbId};
use crate::postprocess::ProbabilityMatrix;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("matrix does not have the raw 4 limb x 3 axis column structure")]
    NotRawConfig,
    #[error("timestep {recording}#{timestep} has a different variant set")]
    InconsistentVariants { recording: String, timestep: u32 },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Which augmentation produced a row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantTag {
    #[default]
    None,
    LrSwap { upper: bool, lower: bool },
    UlPair { arm: LimbId, leg: LimbId },
}

impl VariantTag {
    pub const LR_SWAPS: [VariantTag; 4] = [
        VariantTag::LrSwap { upper: false, lower: false },
        VariantTag::LrSwap { upper: true, lower: false },
        VariantTag::LrSwap { upper: false, lower: true },
        VariantTag::LrSwap { upper: true, lower: true },
    ];

    pub const UL_PAIRS: [VariantTag; 4] = [
        VariantTag::UlPair { arm: LimbId::LeftArm, leg: LimbId::LeftLeg },
        VariantTag::UlPair { arm: LimbId::LeftArm, leg: LimbId::RightLeg },
        VariantTag::UlPair { arm: LimbId::RightArm, leg: LimbId::LeftLeg },
        VariantTag::UlPair { arm: LimbId::RightArm, leg: LimbId::RightLeg },
    ];

    /// True for rows whose values are the unmodified input.
    pub fn is_unswapped(self) -> bool {
        matches!(
            self,
            VariantTag::None | VariantTag::LrSwap { upper: false, lower: false }
        )
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantTag::None => f.write_str("none"),
            VariantTag::LrSwap { upper, lower } => write!(f, "lr{}{}", *upper as u8, *lower as u8),
            VariantTag::UlPair { arm, leg } => write!(f, "ul:{arm}:{leg}"),
        }
    }
}

impl FromStr for VariantTag {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FeatureError::Parse {
            what: "variant tag",
            text: s.into(),
        };
        match s {
            "none" => return Ok(VariantTag::None),
            "lr00" | "lr10" | "lr01" | "lr11" => {
                let b = s.as_bytes();
                return Ok(VariantTag::LrSwap {
                    upper: b[2] == b'1',
                    lower: b[3] == b'1',
                });
            }
            _ => {}
        }
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("ul"), Some(arm), Some(leg), None) => Ok(VariantTag::UlPair {
                arm: LimbId::from_name(arm).ok_or_else(err)?,
                leg: LimbId::from_name(leg).ok_or_else(err)?,
            }),
            _ => Err(err()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationKind {
    /// mean, std
    Stat2,
    /// mean, std, skew
    Stat3,
    /// min, mid, max
    Sort,
}

impl AggregationKind {
    pub fn stats(self) -> &'static [AggStat] {
        match self {
            AggregationKind::Stat2 => &[AggStat::Mean, AggStat::Std],
            AggregationKind::Stat3 => &[AggStat::Mean, AggStat::Std, AggStat::Skew],
            AggregationKind::Sort => &[AggStat::Min, AggStat::Mid, AggStat::Max],
        }
    }
}

/// The seven feature configurations a model can be trained on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationMode {
    Raw,
    Smv,
    Stat2,
    Stat3,
    Sort,
    LrSwap,
    UlPair,
}

impl AugmentationMode {
    pub const ALL: [AugmentationMode; 7] = [
        AugmentationMode::Raw,
        AugmentationMode::Smv,
        AugmentationMode::Stat2,
        AugmentationMode::Stat3,
        AugmentationMode::Sort,
        AugmentationMode::LrSwap,
        AugmentationMode::UlPair,
    ];

    /// Signals the base extraction must be run on.
    pub fn channel_config(self) -> ChannelConfig {
        match self {
            AugmentationMode::Smv => ChannelConfig::Smv,
            _ => ChannelConfig::Raw,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AugmentationMode::Raw => "raw",
            AugmentationMode::Smv => "smv",
            AugmentationMode::Stat2 => "stat2",
            AugmentationMode::Stat3 => "stat3",
            AugmentationMode::Sort => "sort",
            AugmentationMode::LrSwap => "lr_swap",
            AugmentationMode::UlPair => "ul_pair",
        }
    }

    /// Whether the mode emits several variant rows per timestep.
    pub fn is_row_augmenting(self) -> bool {
        matches!(self, AugmentationMode::LrSwap | AugmentationMode::UlPair)
    }

    /// Turns a base extraction into this mode's model input.
    pub fn apply(self, base: &FeatureMatrix) -> Result<FeatureMatrix, AugmentError> {
        match self {
            AugmentationMode::Raw | AugmentationMode::Smv => Ok(base.clone()),
            AugmentationMode::Stat2 => rotation_invariant_aggregate(base, AggregationKind::Stat2),
            AugmentationMode::Stat3 => rotation_invariant_aggregate(base, AggregationKind::Stat3),
            AugmentationMode::Sort => rotation_invariant_aggregate(base, AggregationKind::Sort),
            AugmentationMode::LrSwap => lr_swap_expand(base),
            AugmentationMode::UlPair => ul_pair_expand(base),
        }
    }
}

impl fmt::Display for AugmentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AugmentationMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown augmentation mode `{s}`"))
    }
}

/// Column positions of a raw-axis matrix: `index[limb][axis][slot]`.
struct RawLayout {
    slots: Vec<FeatureColumnKey>,
    index: [[Vec<usize>; 3]; 4],
}

impl RawLayout {
    fn of(m: &FeatureMatrix) -> Result<Self, AugmentError> {
        let template = Channel::Axis(LimbId::LeftArm, Axis::X);
        let slots: Vec<FeatureColumnKey> =
            m.columns().iter().copied().filter(|k| k.channel == template).collect();
        if slots.is_empty() || slots.len() * 12 != m.n_cols() {
            return Err(AugmentError::NotRawConfig);
        }
        let lookup = m.column_index();
        let mut index: [[Vec<usize>; 3]; 4] = Default::default();
        for limb in LimbId::ALL {
            for axis in Axis::ALL {
                let channel = Channel::Axis(limb, axis);
                index[limb.index()][axis.index()] = slots
                    .iter()
                    .map(|s| lookup.get(&s.with_channel(channel)).copied())
                    .collect::<Option<Vec<_>>>()
                    .ok_or(AugmentError::NotRawConfig)?;
            }
        }
        Ok(RawLayout { slots, index })
    }

    fn cols(&self, limb: LimbId, axis: Axis) -> &[usize] {
        &self.index[limb.index()][axis.index()]
    }
}

fn aggregate3(kind: AggregationKind, v: [f64; 3], out: &mut [f64]) {
    if v.iter().any(|x| x.is_nan()) {
        out.iter_mut().for_each(|o| *o = f64::NAN);
        return;
    }
    // sorted first so every statistic is bitwise permutation invariant
    let mut s = v;
    s.sort_by(f64::total_cmp);
    match kind {
        AggregationKind::Sort => out.copy_from_slice(&s),
        AggregationKind::Stat2 | AggregationKind::Stat3 => {
            let mean = (s[0] + s[1] + s[2]) / 3.0;
            let d = s.map(|x| x - mean);
            let m2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / 3.0;
            out[0] = mean;
            out[1] = m2.sqrt();
            if kind == AggregationKind::Stat3 {
                let m3 = (d[0] * d[0] * d[0] + d[1] * d[1] * d[1] + d[2] * d[2] * d[2]) / 3.0;
                out[2] = if m2 < 1e-12 { 0.0 } else { m3 / m2.powf(1.5) };
            }
        }
    }
}

/// Collapses the three axial values of each (limb, direction, window,
/// feature) group into `kind`'s statistics. Groups with a missing value
/// produce missing outputs.
pub fn rotation_invariant_aggregate(
    m: &FeatureMatrix,
    kind: AggregationKind,
) -> Result<FeatureMatrix, AugmentError> {
    let layout = RawLayout::of(m)?;
    let stats = kind.stats();
    let n_slots = layout.slots.len();
    let mut columns = Vec::with_capacity(4 * stats.len() * n_slots);
    for limb in LimbId::ALL {
        for &stat in stats {
            columns.extend(
                layout
                    .slots
                    .iter()
                    .map(|s| s.with_channel(Channel::RotInv(limb, stat))),
            );
        }
    }
    let width = columns.len();
    let mut values = vec![0.0; m.n_rows() * width];
    let mut group = [0.0; 3];
    for (i, out) in values.chunks_mut(width.max(1)).enumerate() {
        let row = m.row(i);
        for limb in LimbId::ALL {
            let base = limb.index() * stats.len() * n_slots;
            let (x, y, z) = (
                layout.cols(limb, Axis::X),
                layout.cols(limb, Axis::Y),
                layout.cols(limb, Axis::Z),
            );
            for s in 0..n_slots {
                aggregate3(kind, [row[x[s]], row[y[s]], row[z[s]]], &mut group[..stats.len()]);
                for (k, &g) in group[..stats.len()].iter().enumerate() {
                    out[base + k * n_slots + s] = g;
                }
            }
        }
    }
    Ok(FeatureMatrix::new(
        columns,
        m.rows().to_vec(),
        values,
        m.labels().map(<[_]>::to_vec),
    )?)
}

fn swap_permutation(layout: &RawLayout, n_cols: usize, upper: bool, lower: bool) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n_cols).collect();
    let pairs = [
        (upper, LimbId::LeftArm, LimbId::RightArm),
        (lower, LimbId::LeftLeg, LimbId::RightLeg),
    ];
    for (active, a, b) in pairs {
        if !active {
            continue;
        }
        for axis in Axis::ALL {
            for (&ca, &cb) in layout.cols(a, axis).iter().zip(layout.cols(b, axis)) {
                perm[ca] = cb;
                perm[cb] = ca;
            }
        }
    }
    perm
}

fn expand(
    m: &FeatureMatrix,
    columns: Vec<FeatureColumnKey>,
    variants: &[(VariantTag, Vec<usize>)],
) -> Result<FeatureMatrix, AugmentError> {
    let width = columns.len();
    let n = m.n_rows() * variants.len();
    let mut rows = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * width);
    let mut labels = m.labels().map(|_| Vec::with_capacity(n));
    for (i, id) in m.rows().iter().enumerate() {
        let row = m.row(i);
        for (tag, source) in variants {
            rows.push(RowId {
                variant: *tag,
                ..id.clone()
            });
            values.extend(source.iter().map(|&c| row[c]));
            if let (Some(out), Some(l)) = (labels.as_mut(), m.labels()) {
                out.push(l[i]);
            }
        }
    }
    Ok(FeatureMatrix::new(columns, rows, values, labels)?)
}

/// Four rows per input row: no swap, upper swap, lower swap, both.
pub fn lr_swap_expand(m: &FeatureMatrix) -> Result<FeatureMatrix, AugmentError> {
    let layout = RawLayout::of(m)?;
    let variants: Vec<(VariantTag, Vec<usize>)> = VariantTag::LR_SWAPS
        .iter()
        .map(|&tag| {
            let VariantTag::LrSwap { upper, lower } = tag else {
                unreachable!()
            };
            (tag, swap_permutation(&layout, m.n_cols(), upper, lower))
        })
        .collect();
    expand(m, m.columns().to_vec(), &variants)
}

/// Four rows per input row, one per (arm, leg) pair, using only that pair's
/// columns under `arm_*` / `leg_*` names.
pub fn ul_pair_expand(m: &FeatureMatrix) -> Result<FeatureMatrix, AugmentError> {
    let layout = RawLayout::of(m)?;
    let mut columns = Vec::with_capacity(6 * layout.slots.len());
    for level in [Level::Upper, Level::Lower] {
        for axis in Axis::ALL {
            columns.extend(
                layout
                    .slots
                    .iter()
                    .map(|s| s.with_channel(Channel::Paired(level, axis))),
            );
        }
    }
    let variants: Vec<(VariantTag, Vec<usize>)> = VariantTag::UL_PAIRS
        .iter()
        .map(|&tag| {
            let VariantTag::UlPair { arm, leg } = tag else {
                unreachable!()
            };
            let source = [arm, leg]
                .into_iter()
                .flat_map(|limb| Axis::ALL.map(|a| layout.cols(limb, a)))
                .flatten()
                .copied()
                .collect();
            (tag, source)
        })
        .collect();
    expand(m, columns, &variants)
}

/// Soft vote across variants: the mean probability row per (recording,
/// timestep). Output rows are in first-appearance order and tagged
/// [`VariantTag::None`].
pub fn aggregate_variants(probs: &ProbabilityMatrix) -> Result<ProbabilityMatrix, AugmentError> {
    let k = probs.n_classes();
    let mut order: Vec<(Arc<str>, u32)> = Vec::new();
    let mut groups: HashMap<(Arc<str>, u32), Vec<usize>> = HashMap::new();
    for (i, row) in probs.rows().iter().enumerate() {
        let key = (row.recording.clone(), row.timestep);
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(i);
    }
    let variant_set = |idx: &[usize]| {
        let mut tags: Vec<VariantTag> = idx.iter().map(|&i| probs.rows()[i].variant).collect();
        tags.sort();
        tags
    };
    let reference = order.first().map(|key| variant_set(&groups[key]));
    let mut rows = Vec::with_capacity(order.len());
    let mut values = Vec::with_capacity(order.len() * k);
    for key in &order {
        let idx = &groups[key];
        if Some(variant_set(idx)) != reference {
            return Err(AugmentError::InconsistentVariants {
                recording: key.0.to_string(),
                timestep: key.1,
            });
        }
        let mut mean = vec![0.0; k];
        for &i in idx {
            for (m, p) in mean.iter_mut().zip(probs.row(i)) {
                *m += p;
            }
        }
        let count = idx.len() as f64;
        values.extend(mean.into_iter().map(|m| m / count));
        rows.push(RowId {
            recording: key.0.clone(),
            timestep: key.1,
            variant: VariantTag::None,
        });
    }
    Ok(ProbabilityMatrix::new(rows, k, values).expect("aggregated shape is consistent"))
}
