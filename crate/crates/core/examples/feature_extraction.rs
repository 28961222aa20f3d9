//! Extracts the multi-window feature matrix of one recording and prints a
//! few columns around an activity change.

use wearhar::features::{Channel, ChannelConfig, Direction, FeatureName};
use wearhar::ingest::{Axis, LimbId};
use wearhar::synth::{generate, SynthConfig};
use wearhar::{extract, WindowPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig {
        subjects: 1,
        classes: 3,
        activity_duration_s: [20.0, 25.0],
        sessions_per_subject: 1,
        ..SynthConfig::default()
    };
    let cohort = generate(&cfg)?;
    let rec = &cohort.recordings[0];
    let plan = WindowPlan::default();

    let raw = extract(rec, &plan, ChannelConfig::Raw);
    let smv = extract(rec, &plan, ChannelConfig::Smv);
    println!("per channel: {}", plan.columns_per_channel());
    println!("raw: {} rows x {} columns", raw.n_rows(), raw.n_cols());
    println!("smv: {} rows x {} columns", smv.n_rows(), smv.n_cols());

    let wanted: Vec<usize> = raw
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, k)| {
            k.channel == Channel::Axis(LimbId::LeftArm, Axis::X)
                && k.direction == Direction::Future
                && k.window_s == 2.0
                && matches!(k.feature, FeatureName::Std | FeatureName::SpectralEntropy)
        })
        .map(|(i, _)| i)
        .collect();
    let labels = raw.labels().expect("synthetic recordings are labeled");
    for t in (0..raw.n_rows()).step_by(10).take(12) {
        let cells: Vec<String> = wanted.iter().map(|&c| format!("{}={:.3}", raw.columns()[c], raw.value(t, c))).collect();
        let name = cohort.vocab.name(labels[t]).unwrap_or("?");
        println!("t={:>5.1}s {:<10} {}", t as f64 * plan.stride_s, name, cells.join("  "));
    }
    Ok(())
}
