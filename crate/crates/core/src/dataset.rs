//! Labeled datasets: comma-separated ingestion, class filtering, and
//! row normalization onto the unit sphere.
//!
//! Input format is plain comma-separated text, one row per sample, feature
//! columns followed by a single label column. The label column is either a
//! class name (filtered through [`load_and_normalize`]) or a numeric value
//! (parsed by [`parse_numeric`]).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    normalized: bool,
    /// 1-based input line each kept row came from, for diagnostics.
    source_rows: Vec<usize>,
    /// Pairs of row indices with bitwise-identical feature rows.
    duplicate_pairs: Vec<(usize, usize)>,
}

impl LabeledDataset {
    /// Builds an unnormalized dataset from raw rows. Labels must be finite
    /// with |y| <= 1; rows must be rectangular and finite.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::NoSamples);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::invalid("rows must have at least one feature"));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite feature in row {i}")));
            }
        }
        for (i, y) in labels.iter().enumerate() {
            if !y.is_finite() || y.abs() > 1.0 {
                return Err(Error::invalid(format!(
                    "label {y} in row {i} outside [-1, 1]"
                )));
            }
        }
        let source_rows = (1..=features.len()).collect();
        let duplicate_pairs = find_duplicates(&features);
        Ok(LabeledDataset {
            features,
            labels,
            normalized: false,
            source_rows,
            duplicate_pairs,
        })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Original 1-based input line of each row.
    pub fn source_rows(&self) -> &[usize] {
        &self.source_rows
    }

    /// Bitwise-identical feature rows. Such rows make the Gram matrix
    /// singular, so they are flagged rather than rejected.
    pub fn duplicate_pairs(&self) -> &[(usize, usize)] {
        &self.duplicate_pairs
    }

    pub fn has_duplicates(&self) -> bool {
        !self.duplicate_pairs.is_empty()
    }

    /// Divides every row by its Euclidean norm. A zero-norm row is an error
    /// naming the offending input line.
    pub fn normalize_rows(mut self) -> Result<Self> {
        for (i, row) in self.features.iter_mut().enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroNormRow {
                    row: self.source_rows[i],
                });
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        self.normalized = true;
        self.duplicate_pairs = find_duplicates(&self.features);
        Ok(self)
    }

    /// Row pairs whose inner product exceeds `1 - tol`; used to diagnose a
    /// near-singular Gram matrix. Requires normalized rows.
    pub fn near_duplicate_pairs(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        let mut pairs = Vec::new();
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let dot: f64 = self.features[i]
                    .iter()
                    .zip(&self.features[j])
                    .map(|(a, b)| a * b)
                    .sum();
                if dot >= 1.0 - tol {
                    pairs.push((self.source_rows[i], self.source_rows[j], dot));
                }
            }
        }
        pairs
    }
}

fn find_duplicates(features: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..features.len() {
        for j in (i + 1)..features.len() {
            if features[i] == features[j] {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// One parsed row: feature columns plus the trailing label column, verbatim.
struct RawRow {
    line: usize,
    features: Vec<f64>,
    label: String,
}

fn parse_rows(text: &str, has_header: bool) -> Result<Vec<RawRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if has_header && rows.is_empty() && idx == 0 {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                message: "expected at least one feature column and a label column".into(),
            });
        }
        let label = cells[cells.len() - 1].to_string();
        let mut features = Vec::with_capacity(cells.len() - 1);
        for cell in &cells[..cells.len() - 1] {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("not a number: {cell:?}"),
            })?;
            features.push(v);
        }
        rows.push(RawRow {
            line: line_no,
            features,
            label,
        });
    }
    if rows.is_empty() {
        return Err(Error::NoSamples);
    }
    let dim = rows[0].features.len();
    for r in &rows {
        if r.features.len() != dim {
            return Err(Error::Parse {
                line: r.line,
                message: format!("expected {dim} feature columns, got {}", r.features.len()),
            });
        }
    }
    Ok(rows)
}

/// Filters a class-labeled table down to two classes and normalizes rows.
///
/// Rows labeled `class_pos` get y = +1, rows labeled `class_neg` get y = -1,
/// everything else is dropped. Each kept feature row is divided by its
/// Euclidean norm.
pub fn load_and_normalize(
    text: &str,
    class_pos: &str,
    class_neg: &str,
    has_header: bool,
) -> Result<LabeledDataset> {
    let rows = parse_rows(text, has_header)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut source_rows = Vec::new();
    for r in rows {
        let y = if r.label == class_pos {
            1.0
        } else if r.label == class_neg {
            -1.0
        } else {
            continue;
        };
        features.push(r.features);
        labels.push(y);
        source_rows.push(r.line);
    }
    if !labels.contains(&1.0) {
        return Err(Error::MissingClass(class_pos.to_string()));
    }
    if !labels.contains(&-1.0) {
        return Err(Error::MissingClass(class_neg.to_string()));
    }
    let duplicate_pairs = find_duplicates(&features);
    let ds = LabeledDataset {
        features,
        labels,
        normalized: false,
        source_rows,
        duplicate_pairs,
    };
    ds.normalize_rows()
}

/// Parses a table whose label column is numeric. Rows are not normalized.
pub fn parse_numeric(text: &str, has_header: bool) -> Result<LabeledDataset> {
    let rows = parse_rows(text, has_header)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut source_rows = Vec::new();
    for r in rows {
        let y: f64 = r.label.parse().map_err(|_| Error::Parse {
            line: r.line,
            message: format!("label is not a number: {:?}", r.label),
        })?;
        features.push(r.features);
        labels.push(y);
        source_rows.push(r.line);
    }
    let duplicate_pairs = find_duplicates(&features);
    Ok(LabeledDataset {
        features,
        labels,
        normalized: false,
        source_rows,
        duplicate_pairs,
    })
}
