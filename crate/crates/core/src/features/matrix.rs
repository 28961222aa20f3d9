use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FeatureColumnKey, FeatureError};
use crate::augment::VariantTag;
use crate::ingest::ActivityLabel;

/// Row identity: recording, prediction timestep index and augmentation variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowId {
    pub recording: Arc<str>,
    pub timestep: u32,
    pub variant: VariantTag,
}

/// Dense row-major feature table. Missing values are NaN.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    columns: Arc<Vec<FeatureColumnKey>>,
    rows: Vec<RowId>,
    values: Vec<f64>,
    labels: Option<Vec<ActivityLabel>>,
}

impl PartialEq for FeatureMatrix {
    /// Bitwise value comparison, so missing entries compare equal.
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
            && self.rows == other.rows
            && self.labels == other.labels
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl FeatureMatrix {
    pub fn new(
        columns: Vec<FeatureColumnKey>,
        rows: Vec<RowId>,
        values: Vec<f64>,
        labels: Option<Vec<ActivityLabel>>,
    ) -> Result<Self, FeatureError> {
        Self::with_shared_columns(Arc::new(columns), rows, values, labels)
    }

    pub(crate) fn with_shared_columns(
        columns: Arc<Vec<FeatureColumnKey>>,
        rows: Vec<RowId>,
        values: Vec<f64>,
        labels: Option<Vec<ActivityLabel>>,
    ) -> Result<Self, FeatureError> {
        let shape_err = || FeatureError::Shape {
            rows: rows.len(),
            cols: columns.len(),
            values: values.len(),
        };
        if rows.len() * columns.len() != values.len() {
            return Err(shape_err());
        }
        if labels.as_ref().is_some_and(|l| l.len() != rows.len()) {
            return Err(shape_err());
        }
        Ok(FeatureMatrix {
            columns,
            rows,
            values,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumnKey] {
        &self.columns
    }

    pub(crate) fn shared_columns(&self) -> Arc<Vec<FeatureColumnKey>> {
        Arc::clone(&self.columns)
    }

    pub fn rows(&self) -> &[RowId] {
        &self.rows
    }

    pub fn labels(&self) -> Option<&[ActivityLabel]> {
        self.labels.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column_index(&self) -> HashMap<FeatureColumnKey, usize> {
        self.columns.iter().enumerate().map(|(i, k)| (*k, i)).collect()
    }

    /// Ordered column keys, one per line.
    pub fn schema_text(&self) -> String {
        schema_text(&self.columns)
    }

    /// SHA-256 of [`Self::schema_text`], hex encoded.
    pub fn schema_hash(&self) -> String {
        schema_hash(&self.columns)
    }

    pub fn into_parts(self) -> (Vec<RowId>, Vec<f64>, Option<Vec<ActivityLabel>>) {
        (self.rows, self.values, self.labels)
    }

    /// Stacks matrices with identical columns. Labels survive only when every
    /// part has them.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix, FeatureError> {
        let Some(first) = parts.first() else {
            return FeatureMatrix::new(Vec::new(), Vec::new(), Vec::new(), None);
        };
        if parts.iter().any(|p| p.columns != first.columns) {
            return Err(FeatureError::ColumnMismatch);
        }
        let total: usize = parts.iter().map(|p| p.n_rows()).sum();
        let mut rows = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total * first.n_cols());
        let all_labeled = parts.iter().all(|p| p.labels.is_some());
        let mut labels = all_labeled.then(|| Vec::with_capacity(total));
        for p in parts {
            rows.extend_from_slice(&p.rows);
            values.extend_from_slice(&p.values);
            if let (Some(out), Some(l)) = (labels.as_mut(), p.labels.as_ref()) {
                out.extend_from_slice(l);
            }
        }
        FeatureMatrix::with_shared_columns(first.shared_columns(), rows, values, labels)
    }

    /// Keeps the rows for which `keep` returns true, in order.
    pub fn filter_rows(&self, mut keep: impl FnMut(&RowId) -> bool) -> FeatureMatrix {
        let c = self.n_cols();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        let mut labels = self.labels.as_ref().map(|_| Vec::new());
        for (i, row) in self.rows.iter().enumerate() {
            if keep(row) {
                rows.push(row.clone());
                values.extend_from_slice(&self.values[i * c..(i + 1) * c]);
                if let (Some(out), Some(l)) = (labels.as_mut(), self.labels.as_ref()) {
                    out.push(l[i]);
                }
            }
        }
        FeatureMatrix {
            columns: self.shared_columns(),
            rows,
            values,
            labels,
        }
    }

    /// Writes `path` as CSV and `path.schema` alongside it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        fs::write(schema_path(path), self.schema_text())?;
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["recording".to_string(), "timestep".into(), "variant".into()];
        if self.labels.is_some() {
            header.push("label".into());
        }
        header.extend(self.columns.iter().map(ToString::to_string));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (i, row) in self.rows.iter().enumerate() {
            record.clear();
            record.push(row.recording.to_string());
            record.push(row.timestep.to_string());
            record.push(row.variant.to_string());
            if let Some(l) = &self.labels {
                record.push(l[i].0.to_string());
            }
            for &v in self.row(i) {
                record.push(if v.is_nan() { String::new() } else { v.to_string() });
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a matrix written by [`Self::write`], checking it against the
    /// schema sidecar when one exists.
    pub fn read(path: impl AsRef<Path>) -> Result<FeatureMatrix, FeatureError> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        let has_labels = header.get(3) == Some("label");
        let first_col = if has_labels { 4 } else { 3 };
        let columns = header
            .iter()
            .skip(first_col)
            .map(str::parse)
            .collect::<Result<Vec<FeatureColumnKey>, _>>()?;
        let sidecar = schema_path(path);
        if sidecar.exists() && fs::read_to_string(&sidecar)? != schema_text(&columns) {
            return Err(FeatureError::SchemaMismatch);
        }
        let parse_err = |what, text: &str| FeatureError::Parse {
            what,
            text: text.to_string(),
        };
        let mut rows = Vec::new();
        let mut values = Vec::new();
        let mut labels = has_labels.then(Vec::new);
        let mut names: HashMap<String, Arc<str>> = HashMap::new();
        for record in r.records() {
            let record = record?;
            let rec_name = &record[0];
            let recording = names
                .entry(rec_name.to_string())
                .or_insert_with(|| Arc::from(rec_name))
                .clone();
            rows.push(RowId {
                recording,
                timestep: record[1].parse().map_err(|_| parse_err("timestep", &record[1]))?,
                variant: record[2].parse()?,
            });
            if let Some(l) = labels.as_mut() {
                let v: u16 = record[3].parse().map_err(|_| parse_err("label", &record[3]))?;
                l.push(ActivityLabel(v));
            }
            for cell in record.iter().skip(first_col) {
                values.push(if cell.is_empty() {
                    f64::NAN
                } else {
                    cell.parse().map_err(|_| parse_err("value", cell))?
                });
            }
        }
        FeatureMatrix::new(columns, rows, values, labels)
    }
}

pub(crate) fn schema_text(columns: &[FeatureColumnKey]) -> String {
    let mut out = String::new();
    for key in columns {
        let _ = writeln!(out, "{key}");
    }
    out
}

pub(crate) fn schema_hash(columns: &[FeatureColumnKey]) -> String {
    let digest = Sha256::digest(schema_text(columns).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sidecar schema path for a matrix file: `features.csv` -> `features.csv.schema`.
pub fn schema_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".schema");
    s.into()
}
