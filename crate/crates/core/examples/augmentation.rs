//! Shows how each of the seven modes reshapes one base feature matrix.

use std::collections::BTreeSet;

use wearhar::synth::{generate, SynthConfig};
use wearhar::{extract, AugmentationMode, WindowPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig {
        subjects: 1,
        classes: 2,
        activity_duration_s: [10.0, 12.0],
        sessions_per_subject: 1,
        ..SynthConfig::default()
    };
    let rec = &generate(&cfg)?.recordings[0];
    let plan = WindowPlan::default();
    for mode in AugmentationMode::ALL {
        let base = extract(rec, &plan, mode.channel_config());
        let m = mode.apply(&base)?;
        let variants: BTreeSet<String> = m.rows().iter().map(|r| r.variant.to_string()).collect();
        println!(
            "{:<8} base {:>4} cols -> {:>5} rows x {:>4} cols  variants [{}]",
            mode.name(),
            base.n_cols(),
            m.n_rows(),
            m.n_cols(),
            variants.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(())
}
