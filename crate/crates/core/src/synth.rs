//! Seeded synthetic cohorts in the recording format of [`crate::ingest`].
//!
//! Each class is a sinusoid mixture per limb, either arm- or leg-dominant,
//! on top of +1 g gravity along x. Sessions of one subject are concatenated
//! into a single recording and share the same segment durations (in a
//! different order), so recording halves coincide with sessions.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    write_recording, ActivityLabel, IngestError, Level, LimbId, Recording, Vocabulary, ACC_RANGE_G,
    SAMPLE_RATE_HZ, WEAR_ACTIVITIES,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Forces an orientation flip regardless of `orientation_flip_prob`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedFlip {
    pub subject: usize,
    pub session: usize,
    pub limb: LimbId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub subjects: usize,
    /// Activity classes, not counting null.
    pub classes: usize,
    /// Inclusive range of each activity segment, seconds.
    pub activity_duration_s: [f64; 2],
    /// Inclusive range of each null gap, seconds.
    pub null_gap_s: [f64; 2],
    pub sessions_per_subject: usize,
    /// Chance that a limb is worn rotated (x and y negated) in a session.
    pub orientation_flip_prob: f64,
    /// Chance, per session and body level, that left and right devices are swapped.
    pub limb_swap_prob: f64,
    pub noise_std_g: f64,
    /// Relative spread of each subject's movement tempo; amplitudes vary twice as much.
    pub subject_variability: f64,
    /// Depth of the slow amplitude modulation within activities, 0 to 1.
    pub amplitude_modulation: f64,
    /// Expected short pauses per minute of activity; labels are unchanged.
    pub pause_rate_per_min: f64,
    pub pause_duration_s: [f64; 2],
    pub forced_flips: Vec<ForcedFlip>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            subjects: 6,
            classes: 6,
            activity_duration_s: [60.0, 90.0],
            null_gap_s: [10.0, 25.0],
            sessions_per_subject: 2,
            orientation_flip_prob: 0.0,
            limb_swap_prob: 0.0,
            noise_std_g: 0.2,
            subject_variability: 0.15,
            amplitude_modulation: 0.3,
            pause_rate_per_min: 4.0,
            pause_duration_s: [1.0, 3.0],
            forced_flips: Vec::new(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.subjects == 0 || self.sessions_per_subject == 0 {
            return bad("subjects and sessions_per_subject must be positive".into());
        }
        if !(1..=WEAR_ACTIVITIES.len()).contains(&self.classes) {
            return bad(format!("classes must be in 1..={}", WEAR_ACTIVITIES.len()));
        }
        let [a0, a1] = self.activity_duration_s;
        if !(a0 > 0.0 && a0 <= a1 && a1.is_finite()) {
            return bad(format!("activity_duration_s {a0}..{a1} is not a positive range"));
        }
        let [g0, g1] = self.null_gap_s;
        if !(g0 >= 0.0 && g0 <= g1 && g1.is_finite()) {
            return bad(format!("null_gap_s {g0}..{g1} is not a non-negative range"));
        }
        for (name, p) in [
            ("orientation_flip_prob", self.orientation_flip_prob),
            ("limb_swap_prob", self.limb_swap_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1]"));
            }
        }
        if !(self.noise_std_g >= 0.0 && self.noise_std_g.is_finite()) {
            return bad("noise_std_g must be non-negative".into());
        }
        if !(0.0..0.5).contains(&self.subject_variability) {
            return bad("subject_variability must be in [0, 0.5)".into());
        }
        if !(0.0..=1.0).contains(&self.amplitude_modulation) {
            return bad("amplitude_modulation must be in [0, 1]".into());
        }
        let [p0, p1] = self.pause_duration_s;
        if !(self.pause_rate_per_min >= 0.0 && p0 > 0.0 && p0 <= p1 && p1.is_finite()) {
            return bad("pauses need a non-negative rate and a positive duration range".into());
        }
        if let Some(f) = self
            .forced_flips
            .iter()
            .find(|f| f.subject >= self.subjects || f.session >= self.sessions_per_subject)
        {
            return bad(format!("forced flip {f:?} is out of range"));
        }
        Ok(())
    }
}

/// Ground truth for one session of one subject.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub subject_id: String,
    pub session: usize,
    pub start_sample: usize,
    pub end_sample: usize,
    pub flipped: Vec<LimbId>,
    pub swapped_levels: Vec<Level>,
}

#[derive(Clone, Debug)]
pub struct Cohort {
    pub recordings: Vec<Recording>,
    pub vocab: Vocabulary,
    pub log: Vec<SessionLog>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a SynthConfig,
    subjects: Vec<&'a str>,
    classes: &'a [String],
    sessions: &'a [SessionLog],
}

impl Cohort {
    /// Writes one CSV per subject, `vocabulary.txt` and `manifest.json`.
    pub fn write(&self, dir: impl AsRef<Path>, cfg: &SynthConfig) -> Result<(), SynthError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for rec in &self.recordings {
            write_recording(rec, dir.join(format!("{}.csv", rec.subject_id)), &self.vocab)?;
        }
        self.vocab.save(dir.join("vocabulary.txt"))?;
        let manifest = Manifest {
            config: cfg,
            subjects: self.recordings.iter().map(|r| r.subject_id.as_str()).collect(),
            classes: self.vocab.names(),
            sessions: &self.log,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

/// Shape of one class on one limb: per-axis amplitude and phase.
#[derive(Clone, Copy, Debug)]
struct LimbProfile {
    amp: [f64; 3],
    phase: [f64; 3],
}

#[derive(Clone, Debug)]
struct ClassProfile {
    freq_hz: f64,
    harmonic: f64,
    limbs: [LimbProfile; 4],
}

fn class_profiles(cfg: &SynthConfig) -> Vec<ClassProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let c = cfg.classes;
    // frequencies stratified over 0.5-4 Hz so classes stay separable
    let mut slots: Vec<usize> = (0..c).collect();
    slots.shuffle(&mut rng);
    (0..c)
        .map(|k| {
            let freq_hz = 0.5 + (slots[k] as f64 + rng.random_range(0.2..0.8)) * 3.5 / c as f64;
            let arm_dominant = k % 2 == 0;
            let harmonic = rng.random_range(0.1..0.5);
            let mut level_amp = |dominant: bool| {
                if dominant {
                    rng.random_range(0.8..2.0)
                } else {
                    rng.random_range(0.2..0.6)
                }
            };
            let arm = level_amp(arm_dominant);
            let leg = level_amp(!arm_dominant);
            let mut level = |base: f64| -> (LimbProfile, f64) {
                let mut p = LimbProfile {
                    amp: [0.0; 3],
                    phase: [0.0; 3],
                };
                for a in 0..3 {
                    p.amp[a] = base * rng.random_range(0.3..1.0);
                    p.phase[a] = rng.random_range(0.0..2.0 * PI);
                }
                (p, rng.random_range(0.0..PI))
            };
            let (arm_p, arm_offset) = level(arm);
            let (leg_p, leg_offset) = level(leg);
            let shifted = |p: LimbProfile, offset: f64| LimbProfile {
                amp: p.amp,
                phase: p.phase.map(|ph| ph + offset),
            };
            let mut limbs = [arm_p; 4];
            limbs[LimbId::LeftArm.index()] = arm_p;
            limbs[LimbId::RightArm.index()] = shifted(arm_p, arm_offset);
            limbs[LimbId::LeftLeg.index()] = leg_p;
            limbs[LimbId::RightLeg.index()] = shifted(leg_p, leg_offset);
            ClassProfile {
                freq_hz,
                harmonic,
                limbs,
            }
        })
        .collect()
}

fn samples_in(range: [f64; 2], rng: &mut ChaCha8Rng) -> usize {
    let rate = SAMPLE_RATE_HZ as f64;
    let lo = (range[0] * rate).ceil() as usize;
    let hi = (range[1] * rate).floor() as usize;
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

struct Subject {
    recording: Recording,
    log: Vec<SessionLog>,
}

fn generate_subject(cfg: &SynthConfig, profiles: &[ClassProfile], index: usize) -> Result<Subject, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64 + 1);
    let subject_id = format!("sbj_{index}");
    let noise = Normal::new(0.0, cfg.noise_std_g).expect("validated");
    let v = cfg.subject_variability;
    let freq_scale = 1.0 + v * rng.random_range(-1.0..=1.0);
    let amp_scale = 1.0 + 2.0 * v * rng.random_range(-1.0..=1.0);

    // same durations in every session, shuffled order
    let activity_len: Vec<usize> = (0..cfg.classes).map(|_| samples_in(cfg.activity_duration_s, &mut rng)).collect();
    let gap_len: Vec<usize> = (0..=cfg.classes).map(|_| samples_in(cfg.null_gap_s, &mut rng)).collect();

    let mut channels: [[Vec<f64>; 3]; 4] = Default::default();
    let mut labels = Vec::new();
    let mut log = Vec::new();
    let rate = SAMPLE_RATE_HZ as f64;
    for session in 0..cfg.sessions_per_subject {
        let start = labels.len();
        let mut order: Vec<usize> = (0..cfg.classes).collect();
        order.shuffle(&mut rng);
        let mut gaps = gap_len.clone();
        gaps.shuffle(&mut rng);
        let mut segments = Vec::with_capacity(2 * cfg.classes + 1);
        for (i, &gap) in gaps.iter().enumerate() {
            segments.push((None, gap));
            if let Some(&class) = order.get(i) {
                segments.push((Some(class), activity_len[class]));
            }
        }
        let mut session_ch: [[Vec<f64>; 3]; 4] = Default::default();
        for (class, len) in segments {
            let label = class.map_or(ActivityLabel::NULL, |c| ActivityLabel(c as u16 + 1));
            labels.extend(std::iter::repeat_n(label, len));
            let offset: f64 = rng.random_range(0.0..2.0 * PI);
            let seg_amp = amp_scale * rng.random_range(0.85..1.15);
            let seg_freq = freq_scale * rng.random_range(0.95..1.05);
            let mod_period = rng.random_range(5.0..15.0);
            let mod_phase = rng.random_range(0.0..2.0 * PI);
            // per-sample activity envelope: slow modulation, near zero in pauses
            let mut envelope: Vec<f64> = (0..len)
                .map(|i| {
                    let t = i as f64 / rate;
                    1.0 + cfg.amplitude_modulation * (2.0 * PI * t / mod_period + mod_phase).sin()
                })
                .collect();
            if class.is_some() && cfg.pause_rate_per_min > 0.0 {
                let expected = cfg.pause_rate_per_min * len as f64 / rate / 60.0;
                let pauses = rand_distr::Poisson::new(expected)
                    .map(|d| d.sample(&mut rng) as usize)
                    .unwrap_or(0);
                for _ in 0..pauses {
                    let plen = samples_in(cfg.pause_duration_s, &mut rng).min(len);
                    let at = rng.random_range(0..=len - plen);
                    envelope[at..at + plen].iter_mut().for_each(|e| *e *= 0.1);
                }
            }
            for limb in LimbId::ALL {
                for axis in 0..3 {
                    let gravity = if axis == 0 { 1.0 } else { 0.0 };
                    let out = &mut session_ch[limb.index()][axis];
                    out.reserve(len);
                    for (i, env) in envelope.iter().enumerate() {
                        let t = i as f64 / rate;
                        let motion = match class {
                            None => 0.05 * (2.0 * PI * 0.2 * t + offset + axis as f64).sin(),
                            Some(c) => {
                                let p = &profiles[c];
                                let lp = &p.limbs[limb.index()];
                                let w = 2.0 * PI * p.freq_hz * seg_freq * t + offset + lp.phase[axis];
                                seg_amp * env * lp.amp[axis] * (w.sin() + p.harmonic * (2.0 * w).sin())
                            }
                        };
                        out.push(gravity + motion + noise.sample(&mut rng));
                    }
                }
            }
        }

        let mut flipped = Vec::new();
        for limb in LimbId::ALL {
            let forced = cfg
                .forced_flips
                .iter()
                .any(|f| f.subject == index && f.session == session && f.limb == limb);
            let random = rng.random_bool(cfg.orientation_flip_prob);
            if forced || random {
                for axis in 0..2 {
                    session_ch[limb.index()][axis].iter_mut().for_each(|v| *v = -*v);
                }
                flipped.push(limb);
            }
        }
        let mut swapped_levels = Vec::new();
        for (level, left, right) in [
            (Level::Upper, LimbId::LeftArm, LimbId::RightArm),
            (Level::Lower, LimbId::LeftLeg, LimbId::RightLeg),
        ] {
            if rng.random_bool(cfg.limb_swap_prob) {
                session_ch.swap(left.index(), right.index());
                swapped_levels.push(level);
            }
        }
        for (all, s) in channels.iter_mut().zip(session_ch) {
            for (a, v) in all.iter_mut().zip(s) {
                a.extend(v.into_iter().map(|x| x.clamp(-ACC_RANGE_G, ACC_RANGE_G)));
            }
        }
        log.push(SessionLog {
            subject_id: subject_id.clone(),
            session,
            start_sample: start,
            end_sample: labels.len(),
            flipped,
            swapped_levels,
        });
    }
    Ok(Subject {
        recording: Recording::new(subject_id, channels, Some(labels))?,
        log,
    })
}

/// Generates a labeled cohort; deterministic per config.
pub fn generate(cfg: &SynthConfig) -> Result<Cohort, SynthError> {
    cfg.validate()?;
    let profiles = class_profiles(cfg);
    let subjects = (0..cfg.subjects)
        .into_par_iter()
        .map(|i| generate_subject(cfg, &profiles, i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut recordings = Vec::with_capacity(subjects.len());
    let mut log = Vec::new();
    for s in subjects {
        recordings.push(s.recording);
        log.extend(s.log);
    }
    Ok(Cohort {
        recordings,
        vocab: Vocabulary::first_activities(cfg.classes),
        log,
    })
}
