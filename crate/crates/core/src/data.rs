//! Datasets: CSV ingestion, the bundled Iris subset and synthetic Gaussians.
//!
//! Every dataset is min-max scaled to `[0, 1]` per feature on construction so
//! that angle encoding `πx` stays in `[0, π]`. Constant columns scale to 0.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const IRIS_CSV: &str = include_str!("../assets/iris.csv");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub features: Vec<f64>,
    pub label: u8,
}

/// Per-feature min-max scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: f64,
    pub max: f64,
}

impl Scaling {
    pub fn scale(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (x - self.min) / span
        } else {
            0.0
        }
    }

    pub fn unscale(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub feature_count: usize,
    pub scaling: Vec<Scaling>,
    pub feature_names: Vec<String>,
    /// Class names for labels 0 and 1.
    pub class_names: [String; 2],
}

impl Dataset {
    /// Scales raw records into `[0, 1]` and records the scaling used.
    pub fn from_raw(
        raw: Vec<Record>,
        feature_names: Vec<String>,
        class_names: [String; 2],
    ) -> Result<Self> {
        let feature_count = raw
            .first()
            .map(|r| r.features.len())
            .ok_or(Error::Empty("dataset has no records"))?;
        if feature_count == 0 {
            return Err(Error::Empty("records have no features"));
        }
        if let Some(bad) = raw.iter().find(|r| r.features.len() != feature_count) {
            return Err(Error::DimensionMismatch {
                expected: feature_count,
                actual: bad.features.len(),
            });
        }
        let scaling: Vec<Scaling> = (0..feature_count)
            .map(|j| {
                let col = raw.iter().map(|r| r.features[j]);
                Scaling {
                    min: col.clone().fold(f64::INFINITY, f64::min),
                    max: col.fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        let records = raw
            .into_iter()
            .map(|r| Record {
                features: r.features.iter().zip(&scaling).map(|(&x, s)| s.scale(x)).collect(),
                label: r.label,
            })
            .collect();
        Ok(Self {
            records,
            feature_count,
            scaling,
            feature_names,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Maps scaled features back to original units.
    pub fn unscale(&self, features: &[f64]) -> Vec<f64> {
        features.iter().zip(&self.scaling).map(|(&y, s)| s.unscale(y)).collect()
    }

    pub fn label_counts(&self) -> [usize; 2] {
        let ones = self.records.iter().filter(|r| r.label == 1).count();
        [self.records.len() - ones, ones]
    }
}

/// Loads a headered CSV. `class_filter` keeps two classes (mapped to 0 and 1
/// in the given order) and is required when the label column has more than two.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    class_filter: Option<[&str; 2]>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, &path.display().to_string(), label_column, class_filter)
}

pub fn parse_csv(
    text: &str,
    source: &str,
    label_column: &str,
    class_filter: Option<[&str; 2]>,
) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Data {
        path: source.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| err(1, format!("no column named '{label_column}'")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: Vec<(Vec<f64>, String)> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| err(0, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(err(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut features = Vec::with_capacity(headers.len() - 1);
        for (i, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(err(line, format!("missing value in column '{}'", headers[i])));
            }
            if i == label_idx {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                err(line, format!("column '{}': '{field}' is not a number", headers[i]))
            })?;
            if !v.is_finite() {
                return Err(err(line, format!("column '{}': non-finite value", headers[i])));
            }
            features.push(v);
        }
        rows.push((features, record[label_idx].to_string()));
    }
    if rows.is_empty() {
        return Err(err(1, "no data rows".into()));
    }

    let mut classes: Vec<String> = Vec::new();
    for (_, label) in &rows {
        if !classes.contains(label) {
            classes.push(label.clone());
        }
    }
    let class_names: [String; 2] = match class_filter {
        Some([a, b]) => {
            for name in [a, b] {
                if !classes.iter().any(|c| c == name) {
                    return Err(err(1, format!("class '{name}' does not occur in '{label_column}'")));
                }
            }
            [a.to_string(), b.to_string()]
        }
        None if classes.len() == 2 => [classes[0].clone(), classes[1].clone()],
        None => {
            return Err(err(
                1,
                format!(
                    "label column '{label_column}' has {} classes; pass a two-class filter",
                    classes.len()
                ),
            ))
        }
    };
    let raw = rows
        .into_iter()
        .filter_map(|(features, label)| {
            let id = class_names.iter().position(|c| *c == label)?;
            Some(Record {
                features,
                label: id as u8,
            })
        })
        .collect();
    Dataset::from_raw(raw, feature_names, class_names)
}

/// Bundled Iris restricted to setosa (label 0) and versicolor (label 1).
pub fn iris_binary() -> Dataset {
    parse_csv(IRIS_CSV, "iris.csv", "species", Some(["setosa", "versicolor"]))
        .expect("bundled Iris asset parses")
}

/// Two Gaussian classes with per-feature means `∓separation/2` and unit
/// variance, `per_class` records each, then min-max scaled.
pub fn synth_gaussians<R: Rng + ?Sized>(
    m: usize,
    per_class: usize,
    separation: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::Empty("synthetic data needs at least one feature"));
    }
    if per_class == 0 {
        return Err(Error::Empty("synthetic data needs at least one record per class"));
    }
    let mut raw = Vec::with_capacity(2 * per_class);
    for label in 0..2u8 {
        let mean = if label == 0 { -separation / 2.0 } else { separation / 2.0 };
        for _ in 0..per_class {
            let features = (0..m)
                .map(|_| mean + Distribution::<f64>::sample(&StandardNormal, &mut *rng))
                .collect();
            raw.push(Record { features, label });
        }
    }
    let names = (0..m).map(|j| format!("x{j}")).collect();
    Dataset::from_raw(raw, names, ["negative".into(), "positive".into()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn two_row_file_scales_to_endpoints() {
        let ds = parse_csv("a,b,y\n0,5,no\n10,5,yes\n", "t.csv", "y", None).unwrap();
        assert_eq!(ds.records[0].features, vec![0.0, 0.0]);
        assert_eq!(ds.records[1].features, vec![1.0, 0.0]);
        assert_eq!(ds.class_names, ["no".to_string(), "yes".to_string()]);
        assert_eq!(ds.scaling[1], Scaling { min: 5.0, max: 5.0 });
    }

    #[test]
    fn iris_subset() {
        let ds = iris_binary();
        assert_eq!((ds.len(), ds.feature_count), (100, 4));
        assert_eq!(ds.label_counts(), [50, 50]);
        for r in &ds.records {
            assert!(r.features.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn iris_needs_filter() {
        let err = parse_csv(IRIS_CSV, "iris.csv", "species", None).unwrap_err();
        assert!(err.to_string().contains("3 classes"), "{err}");
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse_csv("a,y\n1,p\nx,q\n", "bad.csv", "y", None).unwrap_err();
        assert!(matches!(err, Error::Data { line: 3, .. }), "{err}");
        let err = parse_csv("a,y\n1,p\n,q\n", "bad.csv", "y", None).unwrap_err();
        assert!(err.to_string().contains("missing value"), "{err}");
        let err = parse_csv("a,b,y\n1,2,p\n1,q\n", "bad.csv", "y", None).unwrap_err();
        assert!(matches!(err, Error::Data { line: 3, .. }), "{err}");
        assert!(parse_csv("a,y\n1,p\n", "bad.csv", "label", None).is_err());
    }

    #[test]
    fn unscale_round_trip() {
        let ds = iris_binary();
        let raw = ds.unscale(&ds.records[0].features);
        assert!(raw.iter().zip([5.1, 3.5, 1.4, 0.2]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn synthetic_is_balanced_and_seeded() {
        let a = synth_gaussians(5, 40, 3.0, &mut stream(2)).unwrap();
        let b = synth_gaussians(5, 40, 3.0, &mut stream(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.label_counts(), [40, 40]);
        assert!(synth_gaussians(0, 4, 1.0, &mut stream(0)).is_err());
    }
}
