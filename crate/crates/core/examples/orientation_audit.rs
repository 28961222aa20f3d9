//! Flips one limb in one session and shows the audit catching it.

use wearhar::ingest::{audit_orientation, AuditOptions, LimbId};
use wearhar::synth::{generate, ForcedFlip, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig {
        subjects: 4,
        classes: 3,
        activity_duration_s: [15.0, 20.0],
        forced_flips: vec![ForcedFlip {
            subject: 2,
            session: 1,
            limb: LimbId::RightLeg,
        }],
        ..SynthConfig::default()
    };
    let cohort = generate(&cfg)?;
    let reports = audit_orientation(&cohort.recordings, AuditOptions::default());
    for r in &reports {
        for e in &r.entries {
            println!(
                "{} {:<9} {:<6} median_x {:+.3}{}",
                r.subject_id,
                e.limb.name(),
                e.half.name(),
                e.median_x,
                if e.flagged { "  FLAGGED" } else { "" }
            );
        }
    }
    Ok(())
}
