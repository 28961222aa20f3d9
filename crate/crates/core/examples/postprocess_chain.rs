//! Runs fold voting, smoothing, rule boosting and sample expansion on
//! hand-made probabilities.

use std::sync::Arc;

use wearhar::features::RowId;
use wearhar::postprocess::{expand_to_samples, kfold_vote, rule_boost, smooth, RuleBoostConfig, SmoothingConfig};
use wearhar::{ActivityLabel, ProbabilityMatrix};

fn fold(n: usize, noise_every: usize, rec: &Arc<str>) -> ProbabilityMatrix {
    let rows = (0..n)
        .map(|t| RowId {
            recording: rec.clone(),
            timestep: t as u32,
            variant: Default::default(),
        })
        .collect();
    let mut values = Vec::with_capacity(n * 3);
    for t in 0..n {
        // class 1 in the first half, null after it with class 2 lurking at 0.3
        let mut p = if t < n / 2 { [0.2, 0.7, 0.1] } else { [0.6, 0.1, 0.3] };
        if t % noise_every == 0 {
            p.swap(0, 1);
        }
        values.extend(p);
    }
    ProbabilityMatrix::new(rows, 3, values).expect("valid rows")
}

fn runs(labels: &[ActivityLabel]) -> String {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=labels.len() {
        if i == labels.len() || labels[i] != labels[start] {
            out.push(format!("{}x{}", labels[start].0, i - start));
            start = i;
        }
    }
    out.join(" ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rec: Arc<str> = Arc::from("demo");
    let n = 240;
    let folds = [fold(n, 7, &rec), fold(n, 11, &rec), fold(n, 13, &rec)];
    let voted = kfold_vote(&folds)?;
    println!("voted argmax:    {}", runs(&voted.argmax()));
    let smoothed = smooth(&voted, &SmoothingConfig::default());
    let labels = smoothed.argmax();
    println!("smoothed argmax: {}", runs(&labels));
    let boosted = rule_boost(&smoothed, &labels, &RuleBoostConfig::default(), 0.5);
    println!("rule boosted:    {}", runs(&boosted));
    let samples = expand_to_samples(&boosted, n * 25, 50, 0.5)?;
    println!("{} samples: {}", samples.len(), runs(&samples));
    Ok(())
}
