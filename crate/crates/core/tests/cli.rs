use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"
mode = "raw"
seed = 3

[gbdt]
iterations = 4
learning_rate = 0.3

[synth]
subjects = 3
classes = 3
activity_duration_s = [12.0, 16.0]
null_gap_s = [3.0, 5.0]
sessions_per_subject = 1
"#;

fn wearhar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wearhar")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = wearhar(args);
    assert!(
        out.status.success(),
        "wearhar {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn files(dir: &Path, suffix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    v.sort();
    v
}

#[test]
fn synth_extract_cv_predict_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let config = root.join("pipeline.toml");
    fs::write(&config, CONFIG).unwrap();
    let (data, feats, cv, pred) = (root.join("data"), root.join("feats"), root.join("cv"), root.join("pred"));
    let c = p(&config);

    ok(&["--config", c, "synth", "--out", p(&data)]);
    let recordings = files(&data, ".csv");
    assert_eq!(recordings.len(), 3);

    ok(&["--config", c, "extract", "--data", p(&data), "--out", p(&feats)]);
    for schema in files(&feats, ".schema") {
        assert_eq!(fs::read_to_string(schema).unwrap().lines().count(), 1992);
    }

    let stdout = ok(&["--config", c, "cv", "--data", p(&data), "--out", p(&cv)]);
    assert!(stdout.contains("macro_f1 "), "{stdout}");
    assert!(stdout.contains("macro_f1_pp "), "{stdout}");
    for name in ["report.json", "report.txt", "report_smoothed.json", "confusion.csv"] {
        assert!(cv.join(name).exists(), "{name} missing");
    }
    let models = files(&cv, ".model.json");
    assert_eq!(models.len(), 3);

    let mut args = vec!["--config", c, "predict", "--data", p(&data), "--out", p(&pred), "--models"];
    args.extend(models.iter().map(|m| p(m)));
    ok(&args);
    for rec in &recordings {
        let stem = rec.file_stem().unwrap().to_str().unwrap();
        let samples = fs::read_to_string(rec).unwrap().lines().count() - 1;
        let predicted = fs::read_to_string(pred.join(format!("{stem}.predictions.csv"))).unwrap();
        assert_eq!(predicted.lines().count() - 1, samples);
    }

    let stdout = ok(&["--config", c, "evaluate", "--data", p(&data), "--predictions", p(&pred)]);
    let f1: f64 = stdout.trim().strip_prefix("macro_f1 ").unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&f1));

    // training from cached features matches the schema written by extract
    let model = root.join("all.model.json");
    ok(&["--config", c, "train", "--features", p(&feats), "--data", p(&data), "--out", p(&model)]);
    assert!(model.exists());
}

#[test]
fn outputs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let config = root.join("pipeline.toml");
    fs::write(&config, CONFIG).unwrap();
    let c = p(&config);
    for run in ["a", "b"] {
        ok(&["--config", c, "--seed", "9", "synth", "--out", p(&root.join(run))]);
        ok(&["--config", c, "--seed", "9", "audit", "--data", p(&root.join(run)), "--out", p(&root.join(format!("{run}.audit.csv")))]);
    }
    for name in ["sbj_0.csv", "sbj_2.csv", "manifest.json", "vocabulary.txt"] {
        assert_eq!(
            fs::read(root.join("a").join(name)).unwrap(),
            fs::read(root.join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(fs::read(root.join("a.audit.csv")).unwrap(), fs::read(root.join("b.audit.csv")).unwrap());
}

#[test]
fn errors_map_to_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "folds = \"three\"").unwrap();
    let out = wearhar(&["--config", p(&bad), "synth", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let missing = tmp.path().join("nowhere");
    let out = wearhar(&["audit", "--data", p(&missing)]);
    assert_eq!(out.status.code(), Some(3));

    let out = wearhar(&["synth"]);
    assert_eq!(out.status.code(), Some(2), "no output directory is a usage error");

    let out = wearhar(&["--mode", "sideways", "synth", "--out", p(tmp.path())]);
    assert!(!out.status.success());
}
