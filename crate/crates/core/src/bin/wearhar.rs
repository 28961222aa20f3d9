use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wearhar::augment::aggregate_variants;
use wearhar::eval::{pooled_report, read_sample_predictions, run_cv};
use wearhar::ingest::{audit_orientation, load_dir, write_orientation_csv, AuditOptions};
use wearhar::model::Classifier;
use wearhar::postprocess::{expand_to_samples, kfold_vote, rule_boost, smooth, write_sample_predictions};
use wearhar::synth::generate;
use wearhar::{extract, AugmentationMode, Error, FeatureMatrix, GbdtModel, PipelineConfig, Recording, Vocabulary};

#[derive(Parser)]
#[command(name = "wearhar", version, about = "Workout activity detection from four wrist and ankle accelerometers")]
struct Cli {
    /// TOML pipeline config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// raw, smv, stat2, stat3, sort, lr_swap or ul_pair.
    #[arg(long, global = true)]
    mode: Option<AugmentationMode>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic cohort.
    Synth {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long)]
        flip_prob: Option<f64>,
    },
    /// Check per-limb x-axis orientation across recording halves.
    Audit {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the mode's base feature matrix per recording.
    Extract {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one model on every recording.
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Read cached matrices written by `extract` instead of recordings.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grouped k-fold cross-validation.
    Cv {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-sample labels from one or more models, fully post-processed.
    Predict {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_rule_boost: bool,
    },
    /// Score per-sample prediction files against labeled recordings.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wearhar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.synth.seed = s;
    }
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    cfg.validate()?;

    match cli.command {
        Command::Synth { out, subjects, flip_prob } => {
            if let Some(n) = subjects {
                cfg.synth.subjects = n;
            }
            if let Some(p) = flip_prob {
                cfg.synth.orientation_flip_prob = p;
            }
            let dir = out_dir(out, &cfg)?;
            let cohort = generate(&cfg.synth)?;
            cohort.write(&dir, &cfg.synth)?;
            println!("wrote {} recordings to {}", cohort.recordings.len(), dir.display());
        }
        Command::Audit { data, out } => {
            let (recs, _) = load(data, &cfg)?;
            let reports = audit_orientation(&recs, AuditOptions::default());
            match out {
                Some(p) => write_orientation_csv(&reports, fs::File::create(p)?)?,
                None => write_orientation_csv(&reports, io::stdout().lock())?,
            }
            let flagged = reports.iter().flat_map(|r| r.flagged()).count();
            eprintln!("{flagged} flagged recording halves");
        }
        Command::Extract { data, out } => {
            let (recs, _) = load(data, &cfg)?;
            let dir = out_dir(out, &cfg)?;
            fs::create_dir_all(&dir)?;
            for rec in &recs {
                let m = extract(rec, &cfg.windows, cfg.mode.channel_config());
                let path = dir.join(format!("{}.features.csv", rec.subject_id));
                m.write(&path)?;
                println!("{}: {} rows x {} columns", path.display(), m.n_rows(), m.n_cols());
            }
        }
        Command::Train { data, features, out } => {
            let (bases, vocab) = match features {
                Some(dir) => (read_feature_dir(&dir)?, vocabulary(data.as_deref(), &cfg)?),
                None => {
                    let (recs, vocab) = load(data, &cfg)?;
                    let m = recs
                        .iter()
                        .map(|r| extract(r, &cfg.windows, cfg.mode.channel_config()))
                        .collect::<Vec<_>>();
                    (m, vocab)
                }
            };
            let augmented = bases.iter().map(|b| cfg.mode.apply(b)).collect::<Result<Vec<_>, _>>()?;
            let train = FeatureMatrix::concat(&augmented.iter().collect::<Vec<_>>())?;
            let gbdt = wearhar::GbdtConfig { seed: cfg.seed, ..cfg.gbdt.clone() };
            let model = GbdtModel::fit(&train, vocab.len(), &gbdt)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            Classifier::save(&model, &out)?;
            println!("trained on {} rows x {} columns, saved {}", train.n_rows(), train.n_cols(), out.display());
        }
        Command::Cv { data, out } => {
            let (recs, vocab) = load(data, &cfg)?;
            let outcome = run_cv(&recs, vocab.len(), &cfg.cv_config())?;
            let dir = out_dir(out, &cfg)?;
            fs::create_dir_all(&dir)?;
            for (k, m) in outcome.models.iter().enumerate() {
                Classifier::save(m, &dir.join(format!("fold_{k}.model.json")))?;
            }
            outcome.report.write_json(dir.join("report.json"))?;
            outcome.report_smoothed.write_json(dir.join("report_smoothed.json"))?;
            fs::write(dir.join("report.txt"), outcome.report.to_text(Some(&vocab)))?;
            fs::write(dir.join("report_smoothed.txt"), outcome.report_smoothed.to_text(Some(&vocab)))?;
            outcome
                .report_smoothed
                .write_confusion_csv(Some(&vocab), fs::File::create(dir.join("confusion.csv"))?)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "mode {}", cfg.mode)?;
            writeln!(stdout, "macro_f1 {:.4}", outcome.f1())?;
            writeln!(stdout, "macro_f1_pp {:.4}", outcome.f1_pp())?;
        }
        Command::Predict { data, models, out, no_rule_boost } => {
            let (recs, vocab) = load(data, &cfg)?;
            let models = models
                .iter()
                .map(|p| <GbdtModel as Classifier>::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let dir = out_dir(out, &cfg)?;
            fs::create_dir_all(&dir)?;
            for rec in &recs {
                let labels = predict_recording(rec, &models, &cfg, !no_rule_boost)?;
                let path = dir.join(format!("{}.predictions.csv", rec.subject_id));
                write_sample_predictions(&labels, &vocab, io::BufWriter::new(fs::File::create(&path)?))?;
                println!("{}: {} samples", path.display(), labels.len());
            }
        }
        Command::Evaluate { predictions, data, out } => {
            let (recs, vocab) = load(data, &cfg)?;
            let mut preds = Vec::with_capacity(recs.len());
            for rec in &recs {
                let path = predictions.join(format!("{}.predictions.csv", rec.subject_id));
                preds.push(read_sample_predictions(&path, &vocab)?);
            }
            let parts = recs
                .iter()
                .zip(&preds)
                .map(|(r, p)| {
                    let truth = r
                        .labels()
                        .ok_or_else(|| Error::Usage(format!("recording {} has no labels", r.subject_id)))?;
                    Ok((r.subject_id.as_str(), truth, p.as_slice()))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let report = pooled_report(&parts, vocab.len())?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                report.write_json(dir.join("report.json"))?;
                fs::write(dir.join("report.txt"), report.to_text(Some(&vocab)))?;
                report.write_confusion_csv(Some(&vocab), fs::File::create(dir.join("confusion.csv"))?)?;
            }
            println!("macro_f1 {:.4}", report.macro_f1);
        }
    }
    Ok(())
}

/// Fold vote, smoothing, argmax, rule boost and sample expansion.
fn predict_recording(
    rec: &Recording,
    models: &[GbdtModel],
    cfg: &PipelineConfig,
    boost: bool,
) -> Result<Vec<wearhar::ActivityLabel>, Error> {
    let base = extract(rec, &cfg.windows, cfg.mode.channel_config());
    let input = cfg.mode.apply(&base)?;
    let per_model = models
        .iter()
        .map(|m| {
            let p = m.predict_proba(&input)?;
            Ok(if cfg.mode.is_row_augmenting() { aggregate_variants(&p)? } else { p })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let voted = kfold_vote(&per_model)?;
    let smoothed = smooth(&voted, &cfg.smoothing);
    let mut labels = smoothed.argmax();
    if boost {
        labels = rule_boost(&smoothed, &labels, &cfg.rule_boost, cfg.windows.stride_s);
    }
    Ok(expand_to_samples(&labels, rec.len(), rec.sample_rate_hz, cfg.windows.stride_s)?)
}

fn data_dir(flag: Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.paths.data_dir.clone())
        .ok_or_else(|| Error::Usage("no data directory: pass --data or set paths.data_dir".into()))
}

fn out_dir(flag: Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.paths.output_dir.clone())
        .ok_or_else(|| Error::Usage("no output location: pass --out or set paths.output_dir".into()))
}

fn vocabulary(data: Option<&Path>, cfg: &PipelineConfig) -> Result<Vocabulary, Error> {
    if let Some(p) = &cfg.paths.vocabulary {
        return Ok(Vocabulary::load(p)?);
    }
    if let Some(p) = data.map(|d| d.join("vocabulary.txt")).filter(|p| p.exists()) {
        return Ok(Vocabulary::load(p)?);
    }
    Ok(Vocabulary::wear())
}

fn load(flag: Option<PathBuf>, cfg: &PipelineConfig) -> Result<(Vec<Recording>, Vocabulary), Error> {
    let dir = data_dir(flag, cfg)?;
    let vocab = vocabulary(Some(&dir), cfg)?;
    let recs = load_dir(&dir, &vocab)?;
    if recs.is_empty() {
        return Err(Error::Usage(format!("no recordings found in {}", dir.display())));
    }
    Ok((recs, vocab))
}

fn read_feature_dir(dir: &Path) -> Result<Vec<FeatureMatrix>, Error> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".features.csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Usage(format!("no feature matrices found in {}", dir.display())));
    }
    Ok(paths.iter().map(FeatureMatrix::read).collect::<Result<Vec<_>, _>>()?)
}
