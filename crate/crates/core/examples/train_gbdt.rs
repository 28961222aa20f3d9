//! Fits the histogram GBDT on two subjects, scores a third, and round-trips
//! the model through JSON.

use wearhar::eval::macro_f1;
use wearhar::model::Classifier;
use wearhar::synth::{generate, SynthConfig};
use wearhar::{extract, AugmentationMode, FeatureMatrix, GbdtConfig, GbdtModel, WindowPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = SynthConfig {
        subjects: 3,
        classes: 4,
        activity_duration_s: [20.0, 30.0],
        ..SynthConfig::default()
    };
    let cohort = generate(&synth)?;
    let plan = WindowPlan::default();
    let mode = AugmentationMode::Raw;
    let mats: Vec<FeatureMatrix> = cohort
        .recordings
        .iter()
        .map(|r| extract(r, &plan, mode.channel_config()))
        .collect();
    let train = FeatureMatrix::concat(&[&mats[0], &mats[1]])?;
    let test = &mats[2];

    let cfg = GbdtConfig {
        iterations: 30,
        learning_rate: 0.3,
        ..GbdtConfig::default()
    };
    let (model, loss) = GbdtModel::fit_with_trace(&train, cohort.vocab.len(), &cfg)?;
    println!("training loss: {:.4} -> {:.4}", loss[0], loss[loss.len() - 1]);

    let pred = model.predict_proba(test)?.argmax();
    let report = macro_f1(test.labels().expect("labeled"), &pred, cohort.vocab.len())?;
    print!("{}", report.to_text(Some(&cohort.vocab)));

    let dir = std::env::temp_dir().join("wearhar_train_gbdt");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    model.save(&path)?;
    let back = <GbdtModel as Classifier>::load(&path)?;
    assert_eq!(back.predict_proba(test)?.values(), model.predict_proba(test)?.values());
    println!("model saved to {} and reloaded", path.display());
    Ok(())
}
