//! Direct-definition oracles and fixtures shared by the integration tests.
//! Nothing here calls into the library's feature or split code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WINDOW_LENGTHS: [usize; 4] = [2, 3, 50, 1600];

/// Seeded random window mixing scale, offset and occasional ties.
pub fn random_window(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let offset = rng.random_range(-5.0..5.0);
    let quantize = rng.random_bool(0.2);
    (0..n)
        .map(|_| {
            let v: f64 = offset + scale * rng.random_range(-1.0..1.0);
            if quantize {
                (v * 4.0 / scale).round() * scale / 4.0
            } else {
                v
            }
        })
        .collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn central_moment(x: &[f64], k: i32) -> f64 {
    let mu = mean(x);
    x.iter().map(|v| (v - mu).powi(k)).sum::<f64>() / x.len() as f64
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mobility(x: &[f64]) -> f64 {
    let vx = central_moment(x, 2);
    if vx < 1e-12 {
        return 0.0;
    }
    (central_moment(&diff(x), 2) / vx).sqrt()
}

/// The 13 time-domain features, in the library's column order.
pub fn time_oracle(x: &[f64]) -> [f64; 13] {
    let n = x.len();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[n - 1];
    let m2 = central_moment(x, 2);
    let (skew, kurt) = if m2 < 1e-12 {
        (0.0, 0.0)
    } else {
        (central_moment(x, 3) / m2.powf(1.5), central_moment(x, 4) / (m2 * m2) - 3.0)
    };
    let dx = diff(x);
    let mob = mobility(x);
    let complexity = if m2 < 1e-12 || central_moment(&dx, 2) < 1e-12 || n < 3 {
        0.0
    } else {
        mobility(&dx) / mob
    };
    let mu = mean(x);
    let signs: Vec<bool> = x.iter().map(|&v| v >= mu).collect();
    let crossings = signs.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let de = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * m2.max(1e-12)).ln();
    let turns = dx.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64;
    let nf = n as f64;
    let petrosian = nf.log10() / (nf.log10() + (nf / (nf + 0.4 * turns)).log10());
    let l: f64 = dx.iter().map(|d| d.abs()).sum();
    let d = x.iter().map(|v| (v - x[0]).abs()).fold(0.0, f64::max);
    let katz = if n - 1 <= 1 || d == 0.0 || l == 0.0 {
        1.0
    } else {
        let k = ((n - 1) as f64).log10();
        k / (k + (d / l).log10())
    };
    let out = [
        min,
        max,
        max - min,
        quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        m2.sqrt(),
        skew,
        kurt,
        mob,
        complexity,
        crossings,
        de,
        petrosian,
        katz,
    ];
    out.map(|v| if v.is_finite() { v } else { f64::NAN })
}

/// Normalized entropy of the one-sided periodogram via an O(n^2) DFT.
pub fn spectral_oracle(x: &[f64]) -> f64 {
    let n = x.len();
    let mu = mean(x);
    let bins = n / 2;
    let power: Vec<f64> = (1..=bins)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let angle = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                re += (v - mu) * angle.cos();
                im += (v - mu) * angle.sin();
            }
            re * re + im * im
        })
        .collect();
    let total: f64 = power.iter().sum();
    if total < 1e-24 {
        return 0.0;
    }
    let h: f64 = power
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum();
    h / (bins as f64).log2()
}
