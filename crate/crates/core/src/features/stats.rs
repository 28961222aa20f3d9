//! Per-window feature functions.
//!
//! All moments use population normalization. Missing samples (NaN) are
//! dropped before computation, so the effective window may be shorter than
//! the requested one.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{RealFftPlanner, RealToComplex};

use super::{FeatureError, FeatureName};

pub const TIME_FEATURE_COUNT: usize = 13;

/// Variances below this are treated as zero.
const VAR_EPS: f64 = 1e-12;
/// Total AC power below this yields zero spectral entropy.
const POWER_EPS: f64 = 1e-24;

/// The 13 time-domain features of one window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeFeatures {
    pub min: f64,
    pub max: f64,
    pub ptp: f64,
    pub iqr: f64,
    pub std: f64,
    pub skew: f64,
    pub kurtosis: f64,
    pub hjorth_mobility: f64,
    pub hjorth_complexity: f64,
    pub mean_crossing_rate: f64,
    pub differential_entropy: f64,
    pub petrosian_fd: f64,
    pub katz_fd: f64,
}

impl TimeFeatures {
    /// Values in [`FeatureName::TIME_DOMAIN`] order.
    pub fn values(&self) -> [f64; TIME_FEATURE_COUNT] {
        [
            self.min,
            self.max,
            self.ptp,
            self.iqr,
            self.std,
            self.skew,
            self.kurtosis,
            self.hjorth_mobility,
            self.hjorth_complexity,
            self.mean_crossing_rate,
            self.differential_entropy,
            self.petrosian_fd,
            self.katz_fd,
        ]
    }

    fn from_values(v: [f64; TIME_FEATURE_COUNT]) -> Self {
        TimeFeatures {
            min: v[0],
            max: v[1],
            ptp: v[2],
            iqr: v[3],
            std: v[4],
            skew: v[5],
            kurtosis: v[6],
            hjorth_mobility: v[7],
            hjorth_complexity: v[8],
            mean_crossing_rate: v[9],
            differential_entropy: v[10],
            petrosian_fd: v[11],
            katz_fd: v[12],
        }
    }

    pub fn get(&self, feature: FeatureName) -> Option<f64> {
        FeatureName::TIME_DOMAIN
            .iter()
            .position(|&f| f == feature)
            .map(|i| self.values()[i])
    }
}

/// Computes the 13 time-domain features. Windows with fewer than two usable
/// samples are degenerate.
pub fn time_domain_features(window: &[f64]) -> Result<TimeFeatures, FeatureError> {
    let clean: Vec<f64> = window.iter().copied().filter(|v| !v.is_nan()).collect();
    if clean.len() < 2 {
        return Err(FeatureError::DegenerateWindow(clean.len(), 2));
    }
    let mut buf = Vec::new();
    Ok(TimeFeatures::from_values(time_features_clean(&clean, &mut buf)))
}

/// Normalized Shannon entropy of the one-sided periodogram, DC excluded.
pub fn spectral_entropy(window: &[f64], _sample_rate_hz: u32) -> Result<f64, FeatureError> {
    let clean: Vec<f64> = window.iter().copied().filter(|v| !v.is_nan()).collect();
    if clean.len() < 4 {
        return Err(FeatureError::DegenerateWindow(clean.len(), 4));
    }
    Ok(SpectralScratch::default().entropy(&clean))
}

/// `x` must be NaN-free with at least two samples.
pub(crate) fn time_features_clean(x: &[f64], buf: &mut Vec<f64>) -> [f64; TIME_FEATURE_COUNT] {
    let n = x.len();
    let nf = n as f64;

    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in x {
        sum += v;
        min = min.min(v);
        max = max.max(v);
    }
    let mean = sum / nf;

    // One pass for the central moments, crossings and both difference
    // series. The difference means telescope, so they are known up front.
    let m = n - 1;
    let dmean = (x[m] - x[0]) / m as f64;
    let ddmean = if n >= 3 {
        ((x[m] - x[m - 1]) - (x[1] - x[0])) / (n - 2) as f64
    } else {
        0.0
    };
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    let mut crossings = 0usize;
    let mut prev_above = x[0] >= mean;
    let (mut dvar, mut ddvar) = (0.0, 0.0);
    let mut path = 0.0;
    let mut reach: f64 = 0.0;
    let mut turns = 0usize;
    for i in 0..n {
        let v = x[i];
        let d = v - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
        let above = v >= mean;
        crossings += (above != prev_above) as usize;
        prev_above = above;
        if i < m {
            let step = x[i + 1] - v;
            path += step.abs();
            reach = reach.max((x[i + 1] - x[0]).abs());
            let e = step - dmean;
            dvar += e * e;
            if i + 1 < m {
                let next = x[i + 2] - x[i + 1];
                turns += (step * next < 0.0) as usize;
                let e = (next - step) - ddmean;
                ddvar += e * e;
            }
        }
    }
    let m2 = s2 / nf;
    let m3 = s3 / nf;
    let m4 = s4 / nf;
    let (skew, kurtosis) = if m2 < VAR_EPS {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    dvar /= m as f64;
    if n >= 3 {
        ddvar /= (n - 2) as f64;
    }
    let mobility = if m2 < VAR_EPS { 0.0 } else { (dvar / m2).sqrt() };
    let complexity = if m2 < VAR_EPS || dvar < VAR_EPS {
        0.0
    } else {
        (ddvar / dvar).sqrt() / mobility
    };

    let diff_entropy = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * m2.max(VAR_EPS)).ln();

    let log_n = nf.log10();
    let petrosian = log_n / (log_n + (nf / (nf + 0.4 * turns as f64)).log10());

    let katz = if m <= 1 || reach == 0.0 || path == 0.0 {
        1.0
    } else {
        let log_steps = (m as f64).log10();
        log_steps / (log_steps + (reach / path).log10())
    };

    let iqr = iqr_linear(x, buf);

    let mut out = [
        min,
        max,
        max - min,
        iqr,
        m2.sqrt(),
        skew,
        kurtosis,
        mobility,
        complexity,
        crossings as f64,
        diff_entropy,
        petrosian,
        katz,
    ];
    // Katz can diverge on strongly oscillating windows; report as missing.
    for v in &mut out {
        if !v.is_finite() {
            *v = f64::NAN;
        }
    }
    out
}

/// Q75 - Q25 with linear interpolation between order statistics.
fn iqr_linear(x: &[f64], buf: &mut Vec<f64>) -> f64 {
    let n = x.len();
    buf.clear();
    buf.extend_from_slice(x);
    let pos75 = 0.75 * (n - 1) as f64;
    let pos25 = 0.25 * (n - 1) as f64;
    let lo75 = pos75.floor() as usize;
    let lo25 = pos25.floor() as usize;
    let frac75 = pos75 - lo75 as f64;
    let frac25 = pos25 - lo25 as f64;

    buf.select_nth_unstable_by(lo75, f64::total_cmp);
    let v75 = buf[lo75];
    let q75 = if frac75 > 0.0 {
        let next = buf[lo75 + 1..].iter().copied().fold(f64::INFINITY, f64::min);
        v75 + frac75 * (next - v75)
    } else {
        v75
    };
    buf[..=lo75].select_nth_unstable_by(lo25, f64::total_cmp);
    let v25 = buf[lo25];
    let q25 = if frac25 > 0.0 {
        // the next order statistic sits past lo75 when both quartiles share a slot
        let next = buf[lo25 + 1..].iter().copied().fold(f64::INFINITY, f64::min);
        v25 + frac25 * (next - v25)
    } else {
        v25
    };
    q75 - q25
}

/// Reusable FFT plans and buffers for spectral entropy.
pub(crate) struct SpectralScratch {
    planner: RealFftPlanner<f64>,
    plans: Vec<(usize, Arc<dyn RealToComplex<f64>>)>,
    input: Vec<f64>,
    spectrum: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
}

impl Default for SpectralScratch {
    fn default() -> Self {
        SpectralScratch {
            planner: RealFftPlanner::new(),
            plans: Vec::new(),
            input: Vec::new(),
            spectrum: Vec::new(),
            work: Vec::new(),
        }
    }
}

impl SpectralScratch {
    fn plan(&mut self, n: usize) -> Arc<dyn RealToComplex<f64>> {
        if let Some((_, p)) = self.plans.iter().find(|(len, _)| *len == n) {
            return Arc::clone(p);
        }
        let p = self.planner.plan_fft_forward(n);
        self.plans.push((n, Arc::clone(&p)));
        p
    }

    /// `x` must be NaN-free with at least four samples.
    pub(crate) fn entropy(&mut self, x: &[f64]) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let fft = self.plan(n);
        self.input.clear();
        self.input.extend(x.iter().map(|&v| v - mean));
        self.spectrum.resize(n / 2 + 1, Complex::default());
        self.work.resize(fft.get_scratch_len(), Complex::default());
        fft.process_with_scratch(&mut self.input, &mut self.spectrum, &mut self.work)
            .expect("buffer lengths match the plan");

        let bins = n / 2;
        let power = &self.spectrum[1..=bins];
        let total: f64 = power.iter().map(|c| c.norm_sqr()).sum();
        if total < POWER_EPS {
            return 0.0;
        }
        let mut h = 0.0;
        for c in power {
            let p = c.norm_sqr() / total;
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h / (bins as f64).log2()
    }
}
