//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! The synthetic benchmarks train far fewer trees than the production
//! default so the whole file finishes on a single desktop core; see
//! [`bench_gbdt`].

mod common;

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{close, random_window, spectral_oracle, time_oracle, WINDOW_LENGTHS};
use wearhar::augment::{lr_swap_expand, rotation_invariant_aggregate, ul_pair_expand, AggregationKind, VariantTag};
use wearhar::eval::{pooled_report, run_cv_on_features, CvConfig, CvInput, CvOutcome};
use wearhar::features::{spectral_entropy, time_domain_features, Channel, ChannelConfig, FeatureColumnKey, RowId};
use wearhar::ingest::{Axis, LimbId};
use wearhar::model::find_best_split;
use wearhar::postprocess::{expand_to_samples, rule_boost, smooth, RuleBoostConfig, SmoothingConfig};
use wearhar::synth::{generate, SynthConfig};
use wearhar::{extract, ActivityLabel, AugmentationMode, FeatureMatrix, GbdtConfig, GbdtModel, ProbabilityMatrix, Recording, WindowPlan};

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n:>2}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn row_ids(n: usize, rec: &str) -> Vec<RowId> {
    let rec: Arc<str> = Arc::from(rec);
    (0..n)
        .map(|t| RowId {
            recording: rec.clone(),
            timestep: t as u32,
            variant: VariantTag::None,
        })
        .collect()
}

fn random_recording(seed: u64, n: usize) -> Recording {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut channels: [[Vec<f64>; 3]; 4] = Default::default();
    for limb in channels.iter_mut() {
        for axis in limb.iter_mut() {
            *axis = (0..n)
                .map(|_| if rng.random_bool(0.02) { f64::NAN } else { rng.random_range(-3.0..3.0) })
                .collect();
        }
    }
    Recording::new(format!("r{seed}"), channels, None).expect("valid recording")
}

// ---------------------------------------------------------------- 1

#[test]
fn c01_feature_count_identities() {
    let plan = WindowPlan::default();
    let mut failures = Vec::new();
    let expect = [
        (AugmentationMode::Raw, 1992),
        (AugmentationMode::Smv, 664),
        (AugmentationMode::Stat2, 1328),
        (AugmentationMode::Stat3, 1992),
        (AugmentationMode::Sort, 1992),
        (AugmentationMode::LrSwap, 1992),
        (AugmentationMode::UlPair, 996),
    ];
    if plan.columns_per_channel() != 166 {
        failures.push(format!("per channel {}", plan.columns_per_channel()));
    }
    for (seed, n) in [(1u64, 1usize), (2, 37), (3, 1000), (4, 3001)] {
        let rec = random_recording(seed, n);
        let base_raw = extract(&rec, &plan, ChannelConfig::Raw);
        let base_smv = extract(&rec, &plan, ChannelConfig::Smv);
        for (mode, cols) in expect {
            let base = if mode == AugmentationMode::Smv { &base_smv } else { &base_raw };
            let m = mode.apply(base).expect("mode applies to its base");
            if m.n_cols() != cols {
                failures.push(format!("{mode} on {n} samples: {} columns", m.n_cols()));
            }
        }
    }
    report(1, failures.is_empty(), &format!("166/1992/664/1328/1992/1992/1992/996 {failures:?}"));
}

// ---------------------------------------------------------------- 2

#[test]
fn c02_features_match_direct_oracles() {
    let start = Instant::now();
    let mut worst_time: f64 = 0.0;
    let mut worst_spec: f64 = 0.0;
    let mut failures = Vec::new();
    for &n in &WINDOW_LENGTHS {
        for seed in 0..100u64 {
            let x = random_window(seed * 7919 + n as u64, n);
            let got = time_domain_features(&x).expect("n >= 2").values();
            let want = time_oracle(&x);
            for (k, (g, w)) in got.iter().zip(&want).enumerate() {
                if !close(*g, *w, 1e-9) {
                    failures.push(format!("n={n} seed={seed} feature {k}: {g} vs {w}"));
                } else if g.is_finite() {
                    worst_time = worst_time.max((g - w).abs() / w.abs().max(1.0));
                }
            }
            match spectral_entropy(&x, 50) {
                Ok(se) if n >= 4 => {
                    let want = spectral_oracle(&x);
                    worst_spec = worst_spec.max((se - want).abs());
                    if !close(se, want, 1e-6) {
                        failures.push(format!("n={n} seed={seed} spectral entropy: {se} vs {want}"));
                    }
                }
                Err(_) if n < 4 => {}
                other => failures.push(format!("n={n} seed={seed} spectral entropy: unexpected {other:?}")),
            }
        }
    }
    let elapsed = start.elapsed();
    failures.truncate(5);
    report(
        2,
        failures.is_empty() && elapsed < Duration::from_secs(60),
        &format!(
            "worst rel err time {worst_time:.1e}, spectral {worst_spec:.1e}, {:.1}s {failures:?}",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 3

fn random_raw_matrix(seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns = WindowPlan::default().columns_for(&ChannelConfig::Raw.channels());
    let n = rng.random_range(1..12);
    let values = (0..n * columns.len())
        .map(|_| if rng.random_bool(0.03) { f64::NAN } else { rng.random_range(-10.0..10.0) })
        .collect();
    let labels = (0..n).map(|_| ActivityLabel(rng.random_range(0..7))).collect();
    FeatureMatrix::new(columns, row_ids(n, &format!("m{seed}")), values, Some(labels)).unwrap()
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn variant_rows(m: &FeatureMatrix, tag: VariantTag) -> FeatureMatrix {
    m.filter_rows(|r| r.variant == tag)
}

fn mirrored(key: &FeatureColumnKey, upper: bool, lower: bool) -> FeatureColumnKey {
    match key.channel {
        Channel::Axis(limb, axis) if (limb.level() == wearhar::ingest::Level::Upper && upper)
            || (limb.level() == wearhar::ingest::Level::Lower && lower) =>
        {
            key.with_channel(Channel::Axis(limb.mirror(), axis))
        }
        _ => *key,
    }
}

#[test]
fn c03_augmentation_algebra() {
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let m = random_raw_matrix(seed);
        let index = m.column_index();
        let lr = lr_swap_expand(&m).unwrap();
        let ul = ul_pair_expand(&m).unwrap();
        if lr.n_rows() != 4 * m.n_rows() || ul.n_rows() != 4 * m.n_rows() {
            failures.push(format!("seed {seed}: row multipliers {} {}", lr.n_rows(), ul.n_rows()));
        }
        if !same_bits(variant_rows(&lr, VariantTag::LR_SWAPS[0]).values(), m.values()) {
            failures.push(format!("seed {seed}: none-variant differs from input"));
        }
        for tag in VariantTag::LR_SWAPS {
            let VariantTag::LrSwap { upper, lower } = tag else { unreachable!() };
            let once = variant_rows(&lr, tag);
            // every column of a swapped row holds the mirrored column of the input
            for i in 0..m.n_rows() {
                for (c, key) in m.columns().iter().enumerate() {
                    let src = index[&mirrored(key, upper, lower)];
                    if once.value(i, c).to_bits() != m.value(i, src).to_bits() {
                        failures.push(format!("seed {seed}: {tag} column {key}"));
                    }
                }
            }
            let twice = variant_rows(&lr_swap_expand(&once).unwrap(), tag);
            if !same_bits(twice.values(), m.values()) {
                failures.push(format!("seed {seed}: {tag} is not an involution"));
            }
        }
        let ll = variant_rows(&ul, VariantTag::UL_PAIRS[0]);
        let mut projected = Vec::new();
        for i in 0..m.n_rows() {
            for limb in [LimbId::LeftArm, LimbId::LeftLeg] {
                for axis in Axis::ALL {
                    for key in m.columns().iter().filter(|k| k.channel == Channel::Axis(limb, axis)) {
                        projected.push(m.value(i, index[key]));
                    }
                }
            }
        }
        if !same_bits(ll.values(), &projected) {
            failures.push(format!("seed {seed}: UL left/left variant is not a projection"));
        }

        // permute x/y/z within every limb; order statistics must not move
        let perm = [[1usize, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1]][seed as usize % 4];
        let permuted_cols: Vec<usize> = m
            .columns()
            .iter()
            .map(|k| match k.channel {
                Channel::Axis(limb, axis) => index[&k.with_channel(Channel::Axis(limb, Axis::ALL[perm[axis.index()]]))],
                _ => unreachable!(),
            })
            .collect();
        let values: Vec<f64> = (0..m.n_rows())
            .flat_map(|i| permuted_cols.iter().map(move |&c| (i, c)))
            .map(|(i, c)| m.value(i, c))
            .collect();
        let shuffled = FeatureMatrix::new(m.columns().to_vec(), m.rows().to_vec(), values, m.labels().map(<[_]>::to_vec)).unwrap();
        for kind in [AggregationKind::Sort, AggregationKind::Stat2, AggregationKind::Stat3] {
            let a = rotation_invariant_aggregate(&m, kind).unwrap();
            let b = rotation_invariant_aggregate(&shuffled, kind).unwrap();
            if !same_bits(a.values(), b.values()) {
                failures.push(format!("seed {seed}: {kind:?} not permutation invariant"));
            }
        }
    }
    failures.truncate(5);
    report(3, failures.is_empty(), &format!("20 seeded matrices {failures:?}"));
}

// ---------------------------------------------------------------- 4

/// Exact splitter: every threshold between consecutive distinct values,
/// missing values sent either way. Returns the best gain.
fn exact_best_gain(m: &FeatureMatrix, g: &[f64], h: &[f64], l2: f64, min_child: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + l2);
    let (gt, ht): (f64, f64) = (g.iter().sum(), h.iter().sum());
    let parent = score(gt, ht);
    let mut best: f64 = 0.0;
    for f in 0..m.n_cols() {
        let col: Vec<f64> = (0..m.n_rows()).map(|i| m.value(i, f)).collect();
        let distinct: BTreeSet<u64> = col.iter().filter(|v| !v.is_nan()).map(|v| v.to_bits()).collect();
        let mut distinct: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
        distinct.sort_by(f64::total_cmp);
        for &t in distinct.iter().take(distinct.len().saturating_sub(1)) {
            for missing_left in [true, false] {
                let (mut gl, mut hl) = (0.0, 0.0);
                for (i, v) in col.iter().enumerate() {
                    if (v.is_nan() && missing_left) || *v <= t {
                        gl += g[i];
                        hl += h[i];
                    }
                }
                let (gr, hr) = (gt - gl, ht - hl);
                if hl < min_child || hr < min_child || hl <= 0.0 || hr <= 0.0 {
                    continue;
                }
                best = best.max(score(gl, hl) + score(gr, hr) - parent);
            }
        }
    }
    best
}

fn small_classification(seed: u64, rows: usize, cols: usize, levels: u32) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<FeatureColumnKey> = WindowPlan::default()
        .columns_for(&ChannelConfig::Raw.channels())
        .into_iter()
        .take(cols)
        .collect();
    let mut values = Vec::with_capacity(rows * cols);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let row: Vec<f64> = (0..cols)
            .map(|_| if rng.random_bool(0.05) { f64::NAN } else { rng.random_range(0..levels) as f64 * 0.5 })
            .collect();
        let signal = row[0].max(0.0) + 0.5 * row[1 % cols].max(0.0) + rng.random_range(0.0..1.5);
        labels.push(ActivityLabel((signal as u16).min(3)));
        values.extend(row);
    }
    FeatureMatrix::new(columns, row_ids(rows, "gbdt"), values, Some(labels)).unwrap()
}

#[test]
fn c04_gbdt_loss_splitter_determinism() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let m = small_classification(7, 1500, 12, 40);
    let cfg = GbdtConfig {
        iterations: 100,
        seed: 3,
        ..GbdtConfig::default()
    };
    let (model, loss) = GbdtModel::fit_with_trace(&m, 4, &cfg).unwrap();
    if let Some(i) = (1..loss.len()).find(|&i| loss[i] > loss[i - 1]) {
        failures.push(format!("loss rose at iteration {i}: {} -> {}", loss[i - 1], loss[i]));
    }
    let again = GbdtModel::fit(&m, 4, &cfg).unwrap();
    if !same_bits(model.predict_proba(&m).unwrap().values(), again.predict_proba(&m).unwrap().values())
        || serde_json::to_string(model.trees()).unwrap() != serde_json::to_string(again.trees()).unwrap()
    {
        failures.push("refit with the same seed differs".into());
    }

    let mut checked = 0;
    for seed in 0..40u64 {
        let levels = [2, 5, 17, 32][seed as usize % 4];
        let m = small_classification(100 + seed, 300, 6, levels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..m.n_rows()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..m.n_rows()).map(|_| rng.random_range(0.01..0.25)).collect();
        let (l2, min_child) = (0.5, 1.0);
        let want = exact_best_gain(&m, &g, &h, l2, min_child);
        let got = find_best_split(&m, &g, &h, 32, l2, min_child).map_or(0.0, |s| s.gain);
        if !close(got, want, 1e-9) {
            failures.push(format!("seed {seed}: histogram gain {got} vs exact {want}"));
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    failures.truncate(5);
    report(
        4,
        failures.is_empty() && elapsed < Duration::from_secs(120),
        &format!(
            "loss {:.3e} -> {:.3e} over 100 iterations, {checked} splitter cases, {:.1}s {failures:?}",
            loss[0],
            loss[loss.len() - 1],
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 5

fn probs(rows: &[Vec<f64>]) -> ProbabilityMatrix {
    let k = rows[0].len();
    ProbabilityMatrix::new(row_ids(rows.len(), "p"), k, rows.concat()).unwrap()
}

#[test]
fn c05_smoothing_kernel() {
    let cfg = SmoothingConfig::default();
    let w = cfg.kernel();
    let sum: f64 = w.iter().sum();
    let ratio = w[0] / w[10];
    let mut ok = w.len() == 21 && (sum - 1.0).abs() < 1e-12 && (ratio - (-100.0f64 / 72.0).exp()).abs() < 1e-12;

    let constant = probs(&vec![vec![0.2, 0.5, 0.3]; 40]);
    let out = smooth(&constant, &cfg);
    ok &= out.values().iter().zip(constant.values()).all(|(a, b)| (a - b).abs() < 1e-12);

    let mut impulse = vec![vec![0.1, 0.9]; 41];
    impulse[20] = vec![0.95, 0.05];
    let labels = smooth(&probs(&impulse), &cfg).argmax();
    ok &= labels.iter().all(|&l| l == ActivityLabel(1));
    report(5, ok, &format!("sum {sum:.15}, w10/w0 {ratio:.12}, constant identity, impulse removed"));
}

// ---------------------------------------------------------------- 6 and 8

/// Trees and step size used by the synthetic benchmarks. The production
/// default of 1000 trees would take hours per cohort on one core.
fn bench_gbdt() -> GbdtConfig {
    GbdtConfig {
        iterations: 20,
        learning_rate: 0.1,
        ..GbdtConfig::default()
    }
}

fn raw_inputs(recordings: &[Recording]) -> Vec<CvInput> {
    let plan = WindowPlan::default();
    recordings
        .iter()
        .map(|r| CvInput::from_recording(r, &plan, AugmentationMode::Raw).unwrap())
        .collect()
}

fn cv(inputs: &[CvInput], n_classes: usize, mode: AugmentationMode, seed: u64) -> CvOutcome {
    let cfg = CvConfig {
        seed,
        mode,
        gbdt: bench_gbdt(),
        ..CvConfig::default()
    };
    run_cv_on_features(inputs, n_classes, &cfg).unwrap()
}

struct Benchmark {
    f1: Vec<f64>,
    timestep_f1: Vec<f64>,
    elapsed: Duration,
}

fn default_benchmark() -> &'static Benchmark {
    static BENCH: OnceLock<Benchmark> = OnceLock::new();
    BENCH.get_or_init(|| {
        let start = Instant::now();
        let (mut f1, mut timestep_f1) = (Vec::new(), Vec::new());
        for seed in 0..5 {
            let cohort = generate(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
            let out = cv(&raw_inputs(&cohort.recordings), cohort.vocab.len(), AugmentationMode::Raw, seed);
            f1.push(out.f1());
            timestep_f1.push(out.timestep_report.macro_f1);
        }
        Benchmark {
            f1,
            timestep_f1,
            elapsed: start.elapsed(),
        }
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn c06_synthetic_benchmark_raw() {
    let b = default_benchmark();
    let m = mean(&b.f1);
    report(
        6,
        m >= 0.90 && b.elapsed < Duration::from_secs(600),
        &format!("mean raw F1 {m:.4} [{}], {:.0}s", fmt(&b.f1), b.elapsed.as_secs_f64()),
    );
}

#[test]
fn c08_sample_expansion() {
    let b = default_benchmark();
    let deltas: Vec<f64> = b.f1.iter().zip(&b.timestep_f1).map(|(s, t)| s - t).collect();
    let worst = deltas.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    // the same expansion applied to error-free timestep labels
    let floor: Vec<f64> = (0..5)
        .map(|seed| {
            let cohort = generate(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
            let plan = WindowPlan::default();
            let preds: Vec<Vec<ActivityLabel>> = cohort
                .recordings
                .iter()
                .map(|r| {
                    let truth = r.labels().unwrap();
                    let steps: Vec<ActivityLabel> = (0..plan.timestep_count(r.len(), r.sample_rate_hz))
                        .map(|j| truth[plan.timestep_sample(j, r.sample_rate_hz).min(r.len() - 1)])
                        .collect();
                    expand_to_samples(&steps, r.len(), r.sample_rate_hz, plan.stride_s).unwrap()
                })
                .collect();
            let parts: Vec<_> = cohort
                .recordings
                .iter()
                .zip(&preds)
                .map(|(r, p)| (r.subject_id.as_str(), r.labels().unwrap(), p.as_slice()))
                .collect();
            pooled_report(&parts, cohort.vocab.len()).unwrap().macro_f1 - 1.0
        })
        .collect();
    report(
        8,
        worst < 0.001,
        &format!(
            "sample minus timestep F1 [{}], worst |change| {worst:.4}; perfect timestep labels lose [{}]",
            fmt(&deltas),
            fmt(&floor)
        ),
    );
}

// ---------------------------------------------------------------- 7

#[test]
fn c07_directional_orderings_under_flips() {
    let start = Instant::now();
    let (mut raw, mut lr, mut ul) = (Vec::new(), Vec::new(), Vec::new());
    let mut smoothing_wins = [0usize; 3];
    let mut ul_gain = Vec::new();
    for seed in 0..10 {
        let cohort = generate(&SynthConfig {
            seed,
            orientation_flip_prob: 0.3,
            ..SynthConfig::default()
        })
        .unwrap();
        let inputs = raw_inputs(&cohort.recordings);
        let k = cohort.vocab.len();
        for (i, (mode, acc)) in [
            (AugmentationMode::Raw, &mut raw),
            (AugmentationMode::LrSwap, &mut lr),
            (AugmentationMode::UlPair, &mut ul),
        ]
        .into_iter()
        .enumerate()
        {
            let out = cv(&inputs, k, mode, seed);
            smoothing_wins[i] += (out.f1_pp() >= out.f1()) as usize;
            if i == 2 {
                ul_gain.push(format!("{:+.4}", out.f1_pp() - out.f1()));
            }
            acc.push(out.f1_pp());
        }
    }
    let beats = |a: &[f64]| a.iter().zip(&raw).filter(|(x, r)| x >= r).count();
    let (lr_wins, ul_wins) = (beats(&lr), beats(&ul));
    let ok = lr_wins >= 8 && ul_wins >= 8 && smoothing_wins.iter().all(|&w| w >= 8);
    report(
        7,
        ok,
        &format!(
            "F1_PP mean raw {:.4} lr_swap {:.4} ul_pair {:.4}; LR>=raw {lr_wins}/10, UL>=raw {ul_wins}/10, \
             PP>=F1 raw/lr/ul {:?}/10, UL smoothing gain [{}], {:.0}s",
            mean(&raw),
            mean(&lr),
            mean(&ul),
            smoothing_wins,
            ul_gain.join(" "),
            start.elapsed().as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn c09_rule_boost() {
    let cfg = RuleBoostConfig::default();
    let stride = 0.5;
    let null = ActivityLabel(0);
    let mut ok = true;

    // class 1 assigned 90 s: untouched even though class 2 rules the null stretch
    let n = 400;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|t| if t < 180 { vec![0.1, 0.8, 0.1] } else { vec![0.5, 0.1, 0.4] })
        .collect();
    let labels: Vec<ActivityLabel> = (0..n).map(|t| if t < 180 { ActivityLabel(1) } else { null }).collect();
    let out = rule_boost(&probs(&rows), &labels, &cfg, stride);
    ok &= out[..180].iter().all(|&l| l == ActivityLabel(1));
    // class 2 assigned 0 s holding 0.4 over a 110 s null stretch is boosted
    ok &= out[180..].iter().all(|&l| l == ActivityLabel(2));

    // 0 s with 0.3 under a 60 s null stretch → relabeled
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|t| if (40..160).contains(&t) { vec![0.6, 0.1, 0.3] } else { vec![0.9, 0.1, 0.0] })
        .collect();
    let labels = vec![null; 200];
    let out = rule_boost(&probs(&rows), &labels, &cfg, stride);
    ok &= (0..200).all(|t| out[t] == if (40..160).contains(&t) { ActivityLabel(2) } else { null });

    // best qualifying run only 10 s → unchanged
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|t| if (40..60).contains(&t) { vec![0.6, 0.1, 0.3] } else { vec![0.9, 0.1, 0.0] })
        .collect();
    let out = rule_boost(&probs(&rows), &labels, &cfg, stride);
    ok &= out == labels;

    // property: classes already present for 50 s keep every timestep
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(50..400);
        let k = 4;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let r: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect();
        let mut labels = Vec::with_capacity(n);
        while labels.len() < n {
            let l = ActivityLabel(rng.random_range(0..k as u16));
            let run = rng.random_range(1..150);
            labels.extend(std::iter::repeat_n(l, run.min(n - labels.len())));
        }
        let out = rule_boost(&probs(&rows), &labels, &cfg, stride);
        for c in 1..k as u16 {
            let c = ActivityLabel(c);
            let present = labels.iter().filter(|&&l| l == c).count() as f64 * stride >= cfg.min_presence_s;
            for (a, b) in labels.iter().zip(&out) {
                if present && *a == c && *b != c {
                    ok = false;
                }
                if !a.is_null() && a != b {
                    ok = false;
                }
            }
        }
    }
    report(9, ok, "three worked examples and 200 random presence checks");
}

// ---------------------------------------------------------------- 10

/// Full-size check against a local copy of the WEAR recordings, converted to
/// this crate's CSV layout. Skipped unless `WEARHAR_WEAR_DIR` is set.
#[test]
fn c10_wear_reference_score() {
    const REFERENCE_UL_PAIR_F1_PP: f64 = 0.9187;
    let Some(dir) = std::env::var_os("WEARHAR_WEAR_DIR") else {
        println!("criterion 10: SKIP set WEARHAR_WEAR_DIR to a directory of WEAR recordings");
        return;
    };
    let dir = std::path::PathBuf::from(dir);
    let vocab_path = dir.join("vocabulary.txt");
    let vocab = if vocab_path.exists() {
        wearhar::Vocabulary::load(&vocab_path).unwrap()
    } else {
        wearhar::Vocabulary::wear()
    };
    let recordings = wearhar::ingest::load_dir(&dir, &vocab).unwrap();
    let cfg = CvConfig {
        mode: AugmentationMode::UlPair,
        ..CvConfig::default()
    };
    let out = wearhar::eval::run_cv(&recordings, vocab.len(), &cfg).unwrap();
    let f1 = out.f1_pp();
    report(
        10,
        (f1 - REFERENCE_UL_PAIR_F1_PP).abs() <= 0.03,
        &format!("ul_pair F1_PP {f1:.4} vs reference {REFERENCE_UL_PAIR_F1_PP} (advisory)"),
    );
}
