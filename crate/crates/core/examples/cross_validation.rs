//! Grouped 3-fold cross-validation on a synthetic cohort, raw versus
//! UL-pairing, with and without smoothing.

use wearhar::eval::{run_cv_on_features, CvConfig, CvInput};
use wearhar::synth::{generate, SynthConfig};
use wearhar::{AugmentationMode, GbdtConfig, WindowPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = SynthConfig {
        subjects: 6,
        classes: 4,
        activity_duration_s: [20.0, 30.0],
        orientation_flip_prob: 0.3,
        ..SynthConfig::default()
    };
    let cohort = generate(&synth)?;
    let plan = WindowPlan::default();
    let inputs = cohort
        .recordings
        .iter()
        .map(|r| CvInput::from_recording(r, &plan, AugmentationMode::Raw))
        .collect::<Result<Vec<_>, _>>()?;
    for mode in [AugmentationMode::Raw, AugmentationMode::UlPair] {
        let cfg = CvConfig {
            mode,
            gbdt: GbdtConfig {
                iterations: 20,
                learning_rate: 0.3,
                ..GbdtConfig::default()
            },
            ..CvConfig::default()
        };
        let out = run_cv_on_features(&inputs, cohort.vocab.len(), &cfg)?;
        println!("{:<8} F1 {:.4}  F1_PP {:.4}", mode.name(), out.f1(), out.f1_pp());
        for (subject, f1) in &out.report_smoothed.per_subject_macro_f1 {
            println!("    {subject}: {f1:.4}");
        }
    }
    Ok(())
}
