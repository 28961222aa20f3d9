use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureMatrix;

/// Above this many non-missing values, bin edges are computed on a seeded sample.
const EDGE_SAMPLE_CAP: usize = 200_000;

/// Quantile bin edges for one feature.
///
/// A value `x` falls in bin `#{e in edges : e < x}`, so splitting after bin
/// `t` sends `x <= edges[t]` left. With at most `max_bins` distinct values
/// every distinct value except the largest is an edge, which makes the binned
/// split search exact.
pub fn bin_edges(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= max_bins {
        distinct.pop();
        return distinct;
    }
    let n = sorted.len();
    let max = *distinct.last().expect("non-empty");
    let mut edges: Vec<f64> = (1..max_bins)
        .map(|q| sorted[(q * n).div_ceil(max_bins) - 1])
        .filter(|&e| e < max)
        .collect();
    edges.dedup();
    edges
}

/// Column-major bin codes. Missing values use code `missing_code()`.
#[derive(Clone, Debug)]
pub struct BinnedMatrix {
    n_rows: usize,
    n_features: usize,
    max_bins: usize,
    codes: Vec<u8>,
    edges: Vec<Vec<f64>>,
}

impl BinnedMatrix {
    /// Computes edges from `m` itself and bins it.
    pub fn fit(m: &FeatureMatrix, max_bins: usize, seed: u64) -> BinnedMatrix {
        assert!((2..=255).contains(&max_bins));
        let (n_rows, n_features) = (m.n_rows(), m.n_cols());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut col = Vec::with_capacity(n_rows);
        let mut edges = Vec::with_capacity(n_features);
        let mut codes = vec![0u8; n_rows * n_features];
        for f in 0..n_features {
            col.clear();
            col.extend((0..n_rows).map(|r| m.value(r, f)));
            let present: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            let e = if present.len() > EDGE_SAMPLE_CAP {
                let idx = sample(&mut rng, present.len(), EDGE_SAMPLE_CAP);
                let picked: Vec<f64> = idx.iter().map(|i| present[i]).collect();
                bin_edges(&picked, max_bins)
            } else {
                bin_edges(&present, max_bins)
            };
            let out = &mut codes[f * n_rows..(f + 1) * n_rows];
            for (c, &v) in out.iter_mut().zip(&col) {
                *c = bin_code(&e, v, max_bins);
            }
            edges.push(e);
        }
        BinnedMatrix {
            n_rows,
            n_features,
            max_bins,
            codes,
            edges,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn max_bins(&self) -> usize {
        self.max_bins
    }

    /// Histogram slots per feature: the real bins plus the missing slot.
    pub fn slots(&self) -> usize {
        self.max_bins + 1
    }

    pub fn missing_code(&self) -> u8 {
        self.max_bins as u8
    }

    pub fn column(&self, f: usize) -> &[u8] {
        &self.codes[f * self.n_rows..(f + 1) * self.n_rows]
    }

    pub fn edges(&self, f: usize) -> &[f64] {
        &self.edges[f]
    }

    pub fn into_edges(self) -> Vec<Vec<f64>> {
        self.edges
    }
}

pub(crate) fn bin_code(edges: &[f64], v: f64, max_bins: usize) -> u8 {
    if v.is_nan() {
        max_bins as u8
    } else {
        edges.partition_point(|&e| e < v) as u8
    }
}
