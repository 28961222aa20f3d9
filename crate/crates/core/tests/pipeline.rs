use wearhar::eval::{grouped_kfold, macro_f1, run_cv, CvConfig};
use wearhar::ingest::{audit_orientation, load_dir, load_recording, write_recording, AuditOptions, Half, LimbId};
use wearhar::synth::{generate, ForcedFlip, SynthConfig};
use wearhar::{ActivityLabel, AugmentationMode, GbdtConfig};

fn small_cohort(seed: u64) -> SynthConfig {
    SynthConfig {
        seed,
        subjects: 3,
        classes: 3,
        activity_duration_s: [12.0, 16.0],
        null_gap_s: [3.0, 5.0],
        ..SynthConfig::default()
    }
}

#[test]
fn csv_round_trip_preserves_samples_and_labels() {
    let cohort = generate(&small_cohort(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rec = &cohort.recordings[0];
    let path = dir.path().join("one.csv");
    write_recording(rec, &path, &cohort.vocab).unwrap();
    let back = load_recording(&path, &cohort.vocab).unwrap();
    assert_eq!(back.subject_id, rec.subject_id);
    assert_eq!(back.labels(), rec.labels());
    for limb in LimbId::ALL {
        for axis in wearhar::ingest::Axis::ALL {
            let (a, b) = (rec.channel(limb, axis), back.channel(limb, axis));
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    cohort.write(dir.path().join("all"), &small_cohort(1)).unwrap();
    let all = load_dir(dir.path().join("all"), &cohort.vocab).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn audit_flags_exactly_the_forced_flip() {
    let cfg = SynthConfig {
        subjects: 5,
        forced_flips: vec![ForcedFlip {
            subject: 1,
            session: 0,
            limb: LimbId::LeftLeg,
        }],
        ..small_cohort(4)
    };
    let cohort = generate(&cfg).unwrap();
    let reports = audit_orientation(&cohort.recordings, AuditOptions::default());
    let flagged: Vec<(String, LimbId, Half)> = reports
        .iter()
        .flat_map(|r| r.flagged().map(move |e| (r.subject_id.clone(), e.limb, e.half)))
        .collect();
    assert_eq!(flagged, vec![("sbj_1".to_string(), LimbId::LeftLeg, Half::First)]);
}

#[test]
fn fold_sizes_and_determinism() {
    let subjects: Vec<String> = (0..18).map(|i| format!("s{i}")).collect();
    let a = grouped_kfold(&subjects, 3, 7).unwrap();
    assert_eq!(a.sizes(), vec![6, 6, 6]);
    assert_eq!(a, grouped_kfold(&subjects, 3, 7).unwrap());
    let four = grouped_kfold(&["a", "b", "c", "d"], 3, 0).unwrap();
    assert_eq!(four.sizes(), vec![2, 1, 1]);
    assert!(grouped_kfold(&["a", "b"], 3, 0).is_err());
}

#[test]
fn binary_macro_f1_example() {
    let l = |v: &[u16]| v.iter().map(|&x| ActivityLabel(x)).collect::<Vec<_>>();
    let r = macro_f1(&l(&[1, 1, 0, 0]), &l(&[1, 0, 0, 0]), 2).unwrap();
    assert!((r.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    let wrong = macro_f1(&l(&[1, 1, 0]), &l(&[0, 0, 1]), 2).unwrap();
    assert_eq!(wrong.macro_f1, 0.0);
}

#[test]
fn cross_validation_end_to_end() {
    let cohort = generate(&SynthConfig {
        subjects: 6,
        ..small_cohort(2)
    })
    .unwrap();
    let cfg = CvConfig {
        mode: AugmentationMode::UlPair,
        gbdt: GbdtConfig {
            iterations: 5,
            learning_rate: 0.3,
            ..GbdtConfig::default()
        },
        ..CvConfig::default()
    };
    let out = run_cv(&cohort.recordings, cohort.vocab.len(), &cfg).unwrap();
    assert_eq!(out.models.len(), 3);
    assert_eq!(out.out_of_fold.len(), 6);
    for (oof, rec) in out.out_of_fold.iter().zip(&cohort.recordings) {
        assert_eq!(oof.sample_pred.len(), rec.len());
        assert_eq!(oof.probs.n_rows(), oof.timestep_pred.len());
        assert!(out.assignment.fold_of(&oof.subject) == Some(oof.fold));
    }
    assert_eq!(out.report.n_samples(), cohort.recordings.iter().map(|r| r.len() as u64).sum::<u64>());
    assert_eq!(out.report.per_subject_macro_f1.len(), 6);
    assert!(out.f1() > 0.5, "F1 {}", out.f1());

    let again = run_cv(&cohort.recordings, cohort.vocab.len(), &cfg).unwrap();
    assert_eq!(again.report.confusion, out.report.confusion);
}
