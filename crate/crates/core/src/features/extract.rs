use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{time_features_clean, SpectralScratch, TIME_FEATURE_COUNT};
use super::{Channel, FeatureMatrix, RowId, WindowPlan};
use crate::augment::VariantTag;
use crate::ingest::{Axis, LimbId, Recording};

/// Which signals features are computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelConfig {
    /// x, y, z of every limb (12 channels).
    Raw,
    /// One magnitude channel per limb (4 channels).
    Smv,
}

impl ChannelConfig {
    pub fn channels(self) -> Vec<Channel> {
        match self {
            ChannelConfig::Raw => LimbId::ALL
                .into_iter()
                .flat_map(|l| Axis::ALL.map(|a| Channel::Axis(l, a)))
                .collect(),
            ChannelConfig::Smv => LimbId::ALL.into_iter().map(Channel::Smv).collect(),
        }
    }
}

/// Per-limb signal magnitude `sqrt(x^2 + y^2 + z^2)`; missing if any axis is.
pub fn compute_smv(rec: &Recording) -> [Vec<f64>; 4] {
    LimbId::ALL.map(|limb| {
        let x = rec.channel(limb, Axis::X);
        let y = rec.channel(limb, Axis::Y);
        let z = rec.channel(limb, Axis::Z);
        x.iter()
            .zip(y)
            .zip(z)
            .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
            .collect()
    })
}

struct Signal<'a> {
    samples: Cow<'a, [f64]>,
    /// `missing_before[i]` = number of NaN samples in `[0, i)`.
    missing_before: Vec<u32>,
}

impl<'a> Signal<'a> {
    fn new(samples: Cow<'a, [f64]>) -> Self {
        let mut missing_before = Vec::with_capacity(samples.len() + 1);
        let mut count = 0u32;
        missing_before.push(0);
        for v in samples.iter() {
            count += v.is_nan() as u32;
            missing_before.push(count);
        }
        Signal {
            samples,
            missing_before,
        }
    }

    /// Window samples with missing entries removed.
    fn window<'b>(&'b self, lo: usize, hi: usize, buf: &'b mut Vec<f64>) -> &'b [f64] {
        let slice = &self.samples[lo..hi];
        if self.missing_before[hi] == self.missing_before[lo] {
            slice
        } else {
            buf.clear();
            buf.extend(slice.iter().copied().filter(|v| !v.is_nan()));
            buf
        }
    }
}

#[derive(Default)]
struct Scratch {
    window: Vec<f64>,
    sort: Vec<f64>,
    spectral: SpectralScratch,
}

/// Computes the full multi-window feature matrix of one recording.
///
/// One row per timestep `j * stride`, from the first sample up to and
/// including the recording end. Windows are clipped at the edges; a window
/// with fewer than `plan.min_samples` usable samples leaves its features
/// missing. Rows carry the label of the sample at the timestep (clamped to
/// the last sample).
pub fn extract(rec: &Recording, plan: &WindowPlan, config: ChannelConfig) -> FeatureMatrix {
    let channels = config.channels();
    let signals: Vec<Signal> = match config {
        ChannelConfig::Raw => channels
            .iter()
            .map(|ch| match ch {
                Channel::Axis(l, a) => Signal::new(Cow::Borrowed(rec.channel(*l, *a))),
                _ => unreachable!(),
            })
            .collect(),
        ChannelConfig::Smv => compute_smv(rec)
            .into_iter()
            .map(|s| Signal::new(Cow::Owned(s)))
            .collect(),
    };
    let columns = plan.columns_for(&channels);
    let n_cols = columns.len();
    let per_channel = plan.columns_per_channel();
    let n = rec.len();
    let rate = rec.sample_rate_hz;
    let n_rows = plan.timestep_count(n, rate);
    let window_samples: Vec<usize> = plan
        .sizes_s
        .iter()
        .map(|w| (w * rate as f64).round() as usize)
        .collect();

    let widths: Vec<usize> = plan
        .sizes_s
        .iter()
        .map(|&w| TIME_FEATURE_COUNT + plan.has_spectral(w) as usize)
        .collect();
    let offsets: Vec<usize> = widths
        .iter()
        .scan(0, |acc, &w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let per_dir = per_channel / 2;
    let anchors: Vec<usize> = (0..n_rows).map(|j| plan.timestep_sample(j, rate).min(n)).collect();
    let min_samples = plan.min_samples.max(2);
    let compute = |scratch: &mut Scratch, signal: &Signal, lo: usize, hi: usize, spectral: bool, out: &mut [f64]| {
        let Scratch {
            window,
            sort,
            spectral: fft,
        } = scratch;
        let x = signal.window(lo, hi, window);
        if x.len() >= min_samples {
            out[..TIME_FEATURE_COUNT].copy_from_slice(&time_features_clean(x, sort));
            if spectral && x.len() >= plan.spectral_min_samples.max(4) {
                out[TIME_FEATURE_COUNT] = fft.entropy(x);
            }
        }
    };

    // Future windows of every timestep. An unclipped past window of one
    // timestep is exactly the future window of an earlier timestep, so it is
    // copied from here instead of recomputed.
    let fut_cols = signals.len() * per_dir;
    let mut future = vec![f64::NAN; n_rows * fut_cols];
    future
        .par_chunks_mut(fut_cols.max(1))
        .enumerate()
        .for_each_init(Scratch::default, |scratch, (j, out)| {
            let anchor = anchors[j];
            for (ci, signal) in signals.iter().enumerate() {
                for (wi, &len) in window_samples.iter().enumerate() {
                    let at = ci * per_dir + offsets[wi];
                    let spectral = widths[wi] > TIME_FEATURE_COUNT;
                    let hi = (anchor + len).min(n);
                    compute(scratch, signal, anchor, hi, spectral, &mut out[at..at + widths[wi]]);
                }
            }
        });

    let mut values = vec![f64::NAN; n_rows * n_cols];
    values
        .par_chunks_mut(n_cols.max(1))
        .enumerate()
        .for_each_init(Scratch::default, |scratch, (j, out)| {
            let anchor = anchors[j];
            for (ci, signal) in signals.iter().enumerate() {
                let base = ci * per_channel;
                out[base + per_dir..base + per_channel]
                    .copy_from_slice(&future[j * fut_cols + ci * per_dir..][..per_dir]);
                for (wi, &len) in window_samples.iter().enumerate() {
                    let dst = &mut out[base + offsets[wi]..][..widths[wi]];
                    let source = anchor
                        .checked_sub(len)
                        .and_then(|lo| anchors[..j].binary_search(&lo).ok())
                        .filter(|&src| anchors[src] + len <= n);
                    match source {
                        Some(src) => dst.copy_from_slice(
                            &future[src * fut_cols + ci * per_dir + offsets[wi]..][..widths[wi]],
                        ),
                        None => {
                            let spectral = widths[wi] > TIME_FEATURE_COUNT;
                            compute(scratch, signal, anchor.saturating_sub(len), anchor, spectral, dst);
                        }
                    }
                }
            }
        });

    let recording: Arc<str> = Arc::from(rec.subject_id.as_str());
    let rows = (0..n_rows)
        .map(|j| RowId {
            recording: recording.clone(),
            timestep: j as u32,
            variant: VariantTag::None,
        })
        .collect();
    let labels = rec.labels().map(|labels| {
        (0..n_rows)
            .map(|j| labels[plan.timestep_sample(j, rate).min(n - 1)])
            .collect()
    });
    FeatureMatrix::new(columns, rows, values, labels).expect("extraction produces a consistent shape")
}
