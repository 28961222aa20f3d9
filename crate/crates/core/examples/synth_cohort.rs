//! Generates a small labeled cohort and writes it to a directory.
//!
//! Usage: `cargo run --example synth_cohort -- [out_dir]`

use wearhar::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/synth_cohort".into());
    let cfg = SynthConfig {
        subjects: 3,
        classes: 4,
        activity_duration_s: [20.0, 30.0],
        orientation_flip_prob: 0.3,
        ..SynthConfig::default()
    };
    let cohort = generate(&cfg)?;
    for rec in &cohort.recordings {
        println!("{}: {:.1} s, {} samples", rec.subject_id, rec.duration_s(), rec.len());
    }
    for s in cohort.log.iter().filter(|s| !s.flipped.is_empty()) {
        println!("{} session {} flipped {:?}", s.subject_id, s.session, s.flipped);
    }
    cohort.write(&out, &cfg)?;
    println!("classes: {}", cohort.vocab.names().join(", "));
    println!("written to {out}");
    Ok(())
}
