use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::ingest::{Axis, Level, LimbId};

/// The 14 per-window features, in column order. Spectral entropy comes last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureName {
    Min,
    Max,
    Ptp,
    Iqr,
    Std,
    Skew,
    Kurtosis,
    HjorthMobility,
    HjorthComplexity,
    MeanCrossingRate,
    DifferentialEntropy,
    PetrosianFd,
    KatzFd,
    SpectralEntropy,
}

impl FeatureName {
    pub const TIME_DOMAIN: [FeatureName; 13] = [
        FeatureName::Min,
        FeatureName::Max,
        FeatureName::Ptp,
        FeatureName::Iqr,
        FeatureName::Std,
        FeatureName::Skew,
        FeatureName::Kurtosis,
        FeatureName::HjorthMobility,
        FeatureName::HjorthComplexity,
        FeatureName::MeanCrossingRate,
        FeatureName::DifferentialEntropy,
        FeatureName::PetrosianFd,
        FeatureName::KatzFd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureName::Min => "min",
            FeatureName::Max => "max",
            FeatureName::Ptp => "ptp",
            FeatureName::Iqr => "iqr",
            FeatureName::Std => "std",
            FeatureName::Skew => "skew",
            FeatureName::Kurtosis => "kurtosis",
            FeatureName::HjorthMobility => "hjorth_mobility",
            FeatureName::HjorthComplexity => "hjorth_complexity",
            FeatureName::MeanCrossingRate => "mean_crossing_rate",
            FeatureName::DifferentialEntropy => "differential_entropy",
            FeatureName::PetrosianFd => "petrosian_fd",
            FeatureName::KatzFd => "katz_fd",
            FeatureName::SpectralEntropy => "spectral_entropy",
        }
    }

    pub fn is_spectral(self) -> bool {
        self == FeatureName::SpectralEntropy
    }
}

impl FromStr for FeatureName {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureName::TIME_DOMAIN
            .into_iter()
            .chain([FeatureName::SpectralEntropy])
            .find(|f| f.name() == s)
            .ok_or_else(|| FeatureError::Parse {
                what: "feature name",
                text: s.into(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Past,
    Future,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Past, Direction::Future];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Past => "past",
            Direction::Future => "future",
        }
    }
}

/// Summary statistic produced by rotation-invariant aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggStat {
    Mean,
    Std,
    Skew,
    Min,
    Mid,
    Max,
}

impl AggStat {
    pub const ALL: [AggStat; 6] = [
        AggStat::Mean,
        AggStat::Std,
        AggStat::Skew,
        AggStat::Min,
        AggStat::Mid,
        AggStat::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggStat::Mean => "mean",
            AggStat::Std => "std",
            AggStat::Skew => "skew",
            AggStat::Min => "min",
            AggStat::Mid => "mid",
            AggStat::Max => "max",
        }
    }
}

/// Signal a feature column was computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    /// One raw accelerometer axis of one limb.
    Axis(LimbId, Axis),
    /// Signal magnitude vector of one limb.
    Smv(LimbId),
    /// x/y/z features of one limb collapsed into a symmetric statistic.
    RotInv(LimbId, AggStat),
    /// Position-neutral axis of an upper-lower limb pair.
    Paired(Level, Axis),
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Axis(limb, axis) => write!(f, "{}_acc_{}", limb.name(), axis.name()),
            Channel::Smv(limb) => write!(f, "{}_smv", limb.name()),
            Channel::RotInv(limb, stat) => write!(f, "{}_acc_rotinv_{}", limb.name(), stat.name()),
            Channel::Paired(level, axis) => write!(f, "{}_acc_{}", level.name(), axis.name()),
        }
    }
}

impl FromStr for Channel {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FeatureError::Parse {
            what: "channel",
            text: s.into(),
        };
        for limb in LimbId::ALL {
            let Some(rest) = s.strip_prefix(limb.name()).and_then(|r| r.strip_prefix('_')) else {
                continue;
            };
            if rest == "smv" {
                return Ok(Channel::Smv(limb));
            }
            if let Some(stat) = rest.strip_prefix("acc_rotinv_") {
                let stat = AggStat::ALL.into_iter().find(|a| a.name() == stat).ok_or_else(err)?;
                return Ok(Channel::RotInv(limb, stat));
            }
            if let Some(axis) = rest.strip_prefix("acc_") {
                return Axis::from_name(axis).map(|a| Channel::Axis(limb, a)).ok_or_else(err);
            }
            return Err(err());
        }
        for level in [Level::Upper, Level::Lower] {
            if let Some(axis) = s.strip_prefix(level.name()).and_then(|r| r.strip_prefix("_acc_")) {
                return Axis::from_name(axis).map(|a| Channel::Paired(level, a)).ok_or_else(err);
            }
        }
        Err(err())
    }
}

/// Identifies one feature column: channel, window direction and length, feature.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FeatureColumnKey {
    pub channel: Channel,
    pub direction: Direction,
    pub window_s: f64,
    pub feature: FeatureName,
}

impl FeatureColumnKey {
    /// Same window/feature slot on another channel.
    pub fn with_channel(self, channel: Channel) -> Self {
        FeatureColumnKey { channel, ..self }
    }
}

impl PartialEq for FeatureColumnKey {
    fn eq(&self, other: &Self) -> bool {
        self.channel == other.channel
            && self.direction == other.direction
            && self.window_s.to_bits() == other.window_s.to_bits()
            && self.feature == other.feature
    }
}

impl Eq for FeatureColumnKey {}

impl Hash for FeatureColumnKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.channel.hash(state);
        self.direction.hash(state);
        self.window_s.to_bits().hash(state);
        self.feature.hash(state);
    }
}

impl fmt::Display for FeatureColumnKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}",
            self.channel,
            self.direction.name(),
            self.window_s,
            self.feature.name()
        )
    }
}

impl FromStr for FeatureColumnKey {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('|').collect();
        let err = || FeatureError::Parse {
            what: "column key",
            text: s.into(),
        };
        let [channel, direction, window, feature] = parts[..] else {
            return Err(err());
        };
        let direction = match direction {
            "past" => Direction::Past,
            "future" => Direction::Future,
            _ => return Err(err()),
        };
        Ok(FeatureColumnKey {
            channel: channel.parse()?,
            direction,
            window_s: window.parse().map_err(|_| err())?,
            feature: feature.parse()?,
        })
    }
}

/// Window layout around each prediction timestep.
///
/// A past window of `w` seconds at time `t` covers `[t - w, t)`; the future
/// window covers `[t, t + w)`. Windows are clipped at the recording edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowPlan {
    pub sizes_s: Vec<f64>,
    pub stride_s: f64,
    pub min_samples: usize,
    /// Spectral entropy is only computed on windows at least this long.
    pub spectral_min_window_s: f64,
    /// Spectral entropy needs at least this many usable samples.
    pub spectral_min_samples: usize,
}

impl Default for WindowPlan {
    fn default() -> Self {
        WindowPlan {
            sizes_s: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            stride_s: 0.5,
            min_samples: 2,
            spectral_min_window_s: 2.0,
            spectral_min_samples: 4,
        }
    }
}

impl WindowPlan {
    pub fn has_spectral(&self, window_s: f64) -> bool {
        window_s >= self.spectral_min_window_s
    }

    /// Feature slots per channel, in column order.
    pub fn slots(&self) -> Vec<(Direction, f64, FeatureName)> {
        let mut out = Vec::new();
        for direction in Direction::BOTH {
            for &w in &self.sizes_s {
                for feature in FeatureName::TIME_DOMAIN {
                    out.push((direction, w, feature));
                }
                if self.has_spectral(w) {
                    out.push((direction, w, FeatureName::SpectralEntropy));
                }
            }
        }
        out
    }

    pub fn columns_per_channel(&self) -> usize {
        self.slots().len()
    }

    pub fn columns_for(&self, channels: &[Channel]) -> Vec<FeatureColumnKey> {
        let slots = self.slots();
        channels
            .iter()
            .flat_map(|&channel| {
                slots.iter().map(move |&(direction, window_s, feature)| FeatureColumnKey {
                    channel,
                    direction,
                    window_s,
                    feature,
                })
            })
            .collect()
    }

    /// Number of prediction timesteps for a recording of `n_samples`.
    pub fn timestep_count(&self, n_samples: usize, rate_hz: u32) -> usize {
        if n_samples == 0 {
            return 0;
        }
        let duration = n_samples as f64 / rate_hz as f64;
        (duration / self.stride_s + 1e-9).floor() as usize + 1
    }

    /// Sample index anchoring timestep `j`.
    pub fn timestep_sample(&self, j: usize, rate_hz: u32) -> usize {
        (j as f64 * self.stride_s * rate_hz as f64).round() as usize
    }
}
