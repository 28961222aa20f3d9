use serde::{Deserialize, Serialize};

use super::binning::BinnedMatrix;
use crate::features::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        /// Values `<= threshold` go left; always one of the feature's bin edges.
        threshold: f64,
        default_left: bool,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let v = row[*feature as usize];
                    let go_left = if v.is_nan() { *default_left } else { v <= *threshold };
                    i = if go_left { *left } else { *right } as usize;
                }
            }
        }
    }

    /// Number of split levels on the deepest path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Best split of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitInfo {
    pub feature: usize,
    /// Last bin sent left.
    pub bin: usize,
    pub threshold: f64,
    pub default_left: bool,
    pub gain: f64,
}

fn score(g: f64, h: f64, l2: f64) -> f64 {
    let d = h + l2;
    if d > 0.0 {
        g * g / d
    } else {
        0.0
    }
}

/// Scans every feature histogram of one node. Gain is
/// `G_L²/(H_L+λ) + G_R²/(H_R+λ) - G²/(H+λ)`; only strictly positive gains
/// with both child hessians at least `min_child` qualify. Ties keep the
/// lowest feature, then the lowest bin, then missing-left.
fn best_split_in(
    hist: &[[f64; 2]],
    binned: &BinnedMatrix,
    totals: [f64; 2],
    l2: f64,
    min_child: f64,
) -> Option<SplitInfo> {
    let slots = binned.slots();
    let missing = binned.missing_code() as usize;
    let parent = score(totals[0], totals[1], l2);
    let mut best: Option<SplitInfo> = None;
    let mut best_gain = 0.0;
    for f in 0..binned.n_features() {
        let edges = binned.edges(f);
        if edges.is_empty() {
            continue;
        }
        let h = &hist[f * slots..(f + 1) * slots];
        let [mg, mh] = h[missing];
        let (mut gl, mut hl) = (0.0, 0.0);
        for (t, &edge) in edges.iter().enumerate() {
            gl += h[t][0];
            hl += h[t][1];
            for default_left in [true, false] {
                let (g_left, h_left) = if default_left { (gl + mg, hl + mh) } else { (gl, hl) };
                let (g_right, h_right) = (totals[0] - g_left, totals[1] - h_left);
                if h_left < min_child || h_right < min_child || h_left <= 0.0 || h_right <= 0.0 {
                    continue;
                }
                let gain = score(g_left, h_left, l2) + score(g_right, h_right, l2) - parent;
                if gain > best_gain {
                    best_gain = gain;
                    best = Some(SplitInfo {
                        feature: f,
                        bin: t,
                        threshold: edge,
                        default_left,
                        gain,
                    });
                }
            }
        }
    }
    best
}

pub(crate) fn build_histogram(
    binned: &BinnedMatrix,
    gh: &[[f64; 2]],
    rows: &[u32],
    local: &mut Vec<[f64; 2]>,
    hist: &mut [[f64; 2]],
) {
    let slots = binned.slots();
    hist.fill([0.0; 2]);
    local.clear();
    local.extend(rows.iter().map(|&r| gh[r as usize]));
    for f in 0..binned.n_features() {
        let col = binned.column(f);
        let h = &mut hist[f * slots..(f + 1) * slots];
        for (&r, &[g, hs]) in rows.iter().zip(local.iter()) {
            let e = &mut h[col[r as usize] as usize];
            e[0] += g;
            e[1] += hs;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    /// Fractions of the root hessian.
    pub l2_rel: f64,
    pub min_child_rel: f64,
    pub learning_rate: f64,
}

struct Pending {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
    totals: [f64; 2],
    hist: Option<Vec<[f64; 2]>>,
}

/// Reusable buffers for tree growth.
#[derive(Default)]
pub(crate) struct Grower {
    order: Vec<u32>,
    spill: Vec<u32>,
    local: Vec<[f64; 2]>,
    pool: Vec<Vec<[f64; 2]>>,
}

impl Grower {
    fn take_hist(&mut self, len: usize) -> Vec<[f64; 2]> {
        let mut h = self.pool.pop().unwrap_or_default();
        h.resize(len, [0.0; 2]);
        h
    }

    /// Grows one tree on per-row (gradient, hessian) pairs. Writes each row's
    /// leaf value (already scaled by the learning rate) into `delta`.
    pub(crate) fn grow(
        &mut self,
        binned: &BinnedMatrix,
        gh: &[[f64; 2]],
        params: GrowParams,
        delta: &mut [f64],
    ) -> Tree {
        let n = binned.n_rows();
        let hist_len = binned.n_features() * binned.slots();
        self.order.clear();
        self.order.extend(0..n as u32);
        let totals = sum_rows(gh, &self.order);
        let l2 = params.l2_rel * totals[1];
        let min_child = params.min_child_rel * totals[1];
        let leaf = |t: [f64; 2]| {
            let d = t[1] + l2;
            if d > 0.0 {
                -t[0] / d * params.learning_rate
            } else {
                0.0
            }
        };

        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut queue = std::collections::VecDeque::new();
        let root_hist = if params.max_depth > 0 && n >= 2 {
            let mut h = self.take_hist(hist_len);
            build_histogram(binned, gh, &self.order, &mut self.local, &mut h);
            Some(h)
        } else {
            None
        };
        queue.push_back(Pending {
            node: 0,
            start: 0,
            end: n,
            depth: 0,
            totals,
            hist: root_hist,
        });

        while let Some(p) = queue.pop_front() {
            let split = p
                .hist
                .as_ref()
                .and_then(|h| best_split_in(h, binned, p.totals, l2, min_child));
            let Some(split) = split else {
                let value = leaf(p.totals);
                nodes[p.node] = Node::Leaf { value };
                for &r in &self.order[p.start..p.end] {
                    delta[r as usize] = value;
                }
                if let Some(h) = p.hist {
                    self.pool.push(h);
                }
                continue;
            };

            // Stable partition of the node's rows.
            let col = binned.column(split.feature);
            let missing = binned.missing_code();
            self.spill.clear();
            let mut write = p.start;
            for i in p.start..p.end {
                let r = self.order[i];
                let b = col[r as usize];
                let go_left = if b == missing { split.default_left } else { b as usize <= split.bin };
                if go_left {
                    self.order[write] = r;
                    write += 1;
                } else {
                    self.spill.push(r);
                }
            }
            self.order[write..p.end].copy_from_slice(&self.spill);
            let mid = write;

            let left_totals = sum_rows(gh, &self.order[p.start..mid]);
            let right_totals = sum_rows(gh, &self.order[mid..p.end]);
            let child_depth = p.depth + 1;
            let (left_hist, right_hist) = if child_depth < params.max_depth {
                let mut parent = p.hist.expect("split nodes have a histogram");
                let mut small = self.take_hist(hist_len);
                let left_smaller = mid - p.start <= p.end - mid;
                let rows = if left_smaller {
                    &self.order[p.start..mid]
                } else {
                    &self.order[mid..p.end]
                };
                build_histogram(binned, gh, rows, &mut self.local, &mut small);
                for (a, b) in parent.iter_mut().zip(&small) {
                    a[0] -= b[0];
                    a[1] -= b[1];
                }
                if left_smaller {
                    (Some(small), Some(parent))
                } else {
                    (Some(parent), Some(small))
                }
            } else {
                if let Some(h) = p.hist {
                    self.pool.push(h);
                }
                (None, None)
            };

            let left = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[p.node] = Node::Split {
                feature: split.feature as u32,
                threshold: split.threshold,
                default_left: split.default_left,
                left: left as u32,
                right: left as u32 + 1,
            };
            queue.push_back(Pending {
                node: left,
                start: p.start,
                end: mid,
                depth: child_depth,
                totals: left_totals,
                hist: left_hist,
            });
            queue.push_back(Pending {
                node: left + 1,
                start: mid,
                end: p.end,
                depth: child_depth,
                totals: right_totals,
                hist: right_hist,
            });
        }
        Tree { nodes }
    }
}

fn sum_rows(gh: &[[f64; 2]], rows: &[u32]) -> [f64; 2] {
    rows.iter().fold([0.0; 2], |acc, &r| {
        let v = gh[r as usize];
        [acc[0] + v[0], acc[1] + v[1]]
    })
}

/// Best root split of `m` under the histogram splitter, with absolute `l2`
/// and `min_child_hessian`. Exposed for checking the splitter in isolation.
pub fn find_best_split(
    m: &FeatureMatrix,
    gradients: &[f64],
    hessians: &[f64],
    histogram_bins: usize,
    l2: f64,
    min_child_hessian: f64,
) -> Option<SplitInfo> {
    let binned = BinnedMatrix::fit(m, histogram_bins, 0);
    let gh: Vec<[f64; 2]> = gradients.iter().zip(hessians).map(|(&g, &h)| [g, h]).collect();
    let rows: Vec<u32> = (0..m.n_rows() as u32).collect();
    let mut hist = vec![[0.0; 2]; binned.n_features() * binned.slots()];
    build_histogram(&binned, &gh, &rows, &mut Vec::new(), &mut hist);
    best_split_in(&hist, &binned, sum_rows(&gh, &rows), l2, min_child_hessian)
}
