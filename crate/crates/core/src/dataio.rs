//! Tabular datasets: CSV / KEEL `.dat` ingestion, min-max normalization and
//! the random 75/25 train/test split.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::paramgen::{Hypercube, RngStream};

/// Inputs `x` (N×n) and a scalar target per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub feature_names: Option<Vec<String>>,
    pub target_name: Option<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::InvalidInput(format!(
                "{} input rows but {} targets",
                x.rows(),
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite target value".into()));
        }
        Ok(Self {
            x,
            y,
            feature_names: None,
            target_name: None,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn hypercube(&self) -> Hypercube {
        crate::paramgen::input_hypercube(&self.x).expect("dataset has at least one row")
    }

    /// Rows picked by index; names are carried over.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(indices)?;
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Ok(Dataset {
            x,
            y,
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        })
    }
}

/// Affine map of one column from its fitted `[source_min, source_max]` onto
/// `[target_min, target_max]`. A constant column maps to the target midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub source_min: f64,
    pub source_max: f64,
    pub target_min: f64,
    pub target_max: f64,
}

impl ColumnScaling {
    pub fn fit(values: impl IntoIterator<Item = f64>, target_min: f64, target_max: f64) -> Self {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        Self {
            source_min: lo,
            source_max: hi,
            target_min,
            target_max,
        }
    }

    fn is_constant(&self) -> bool {
        self.source_max <= self.source_min
    }

    pub fn scale(&self) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (self.target_max - self.target_min) / (self.source_max - self.source_min)
        }
    }

    pub fn offset(&self) -> f64 {
        if self.is_constant() {
            0.5 * (self.target_min + self.target_max)
        } else {
            self.target_min - self.source_min * self.scale()
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.is_constant() {
            return 0.5 * (self.target_min + self.target_max);
        }
        let t = (v - self.source_min) / (self.source_max - self.source_min);
        self.target_min + t * (self.target_max - self.target_min)
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.is_constant() {
            return self.source_min;
        }
        let t = (v - self.target_min) / (self.target_max - self.target_min);
        self.source_min + t * (self.source_max - self.source_min)
    }
}

/// Per-column input maps plus the output map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub inputs: Vec<ColumnScaling>,
    pub output: ColumnScaling,
}

impl NormalizationSpec {
    /// Fits min-max maps on `ds`: inputs onto `input_range`, target onto
    /// `output_range`.
    pub fn fit(ds: &Dataset, input_range: (f64, f64), output_range: (f64, f64)) -> Self {
        let inputs = (0..ds.dim())
            .map(|j| {
                ColumnScaling::fit(
                    (0..ds.len()).map(|i| ds.x[(i, j)]),
                    input_range.0,
                    input_range.1,
                )
            })
            .collect();
        let output = ColumnScaling::fit(ds.y.iter().copied(), output_range.0, output_range.1);
        Self { inputs, output }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.dim() != self.inputs.len() {
            return Err(Error::InvalidInput(format!(
                "normalization fitted on {} columns, dataset has {}",
                self.inputs.len(),
                ds.dim()
            )));
        }
        let x = Matrix::from_fn(ds.len(), ds.dim(), |i, j| self.inputs[j].apply(ds.x[(i, j)]));
        let y = ds.y.iter().map(|&v| self.output.apply(v)).collect();
        Ok(Dataset {
            x,
            y,
            feature_names: ds.feature_names.clone(),
            target_name: ds.target_name.clone(),
        })
    }

    pub fn apply_inputs(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.inputs.len() {
            return Err(Error::InvalidInput(format!(
                "normalization fitted on {} columns, input has {}",
                self.inputs.len(),
                x.cols()
            )));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            self.inputs[j].apply(x[(i, j)])
        }))
    }

    pub fn denormalize_inputs(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |i, j| self.inputs[j].invert(x[(i, j)]))
    }

    pub fn denormalize_output(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| self.output.invert(v)).collect()
    }
}

/// Min-max normalization onto `[0, 1]` for inputs and target. With `spec`
/// given, that spec is applied unchanged (the test-set path).
pub fn normalize(
    ds: &Dataset,
    spec: Option<&NormalizationSpec>,
) -> Result<(Dataset, NormalizationSpec)> {
    let spec = match spec {
        Some(s) => s.clone(),
        None => NormalizationSpec::fit(ds, (0.0, 1.0), (0.0, 1.0)),
    };
    let out = spec.apply(ds)?;
    Ok((out, spec))
}

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
    /// Zero-based target column; the last column when `None`.
    pub target_column: Option<usize>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
            target_column: None,
        }
    }
}

/// Loads a numeric table. Lines starting with `@` (KEEL `.dat` headers) are
/// skipped; `@attribute` lines supply column names when there is no header row.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_table(&text, opts)
}

pub fn parse_table(text: &str, opts: &CsvOptions) -> Result<Dataset> {
    let keel_names: Vec<String> = text
        .lines()
        .filter_map(|l| {
            let l = l.trim_start();
            let rest = l
                .strip_prefix("@attribute")
                .or_else(|| l.strip_prefix("@ATTRIBUTE"))
                .or_else(|| l.strip_prefix("@Attribute"))?;
            rest.split_whitespace().next().map(str::to_owned)
        })
        .collect();

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .comment(Some(b'@'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut names: Option<Vec<String>> = if opts.header {
        Some(reader.headers()?.iter().map(str::to_owned).collect())
    } else if !keel_names.is_empty() {
        Some(keel_names)
    } else {
        None
    };

    let mut width: Option<usize> = None;
    let mut cells: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Format(format!(
                    "line {line} has {} fields, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        for (column, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: column + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: column + 1,
                    message: format!("non-finite value: {cell:?}"),
                });
            }
            cells.push(v);
        }
        rows += 1;
    }

    let width = width.ok_or_else(|| Error::Format("no data rows".into()))?;
    if width < 2 {
        return Err(Error::Format(
            "need at least one input column and a target column".into(),
        ));
    }
    let target = opts.target_column.unwrap_or(width - 1);
    if target >= width {
        return Err(Error::InvalidInput(format!(
            "target column {target} out of range for {width} columns"
        )));
    }
    if names.as_ref().is_some_and(|n| n.len() != width) {
        names = None;
    }

    let n = width - 1;
    let mut x = Vec::with_capacity(rows * n);
    let mut y = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &cells[r * width..(r + 1) * width];
        for (j, &v) in row.iter().enumerate() {
            if j == target {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    let mut ds = Dataset::new(Matrix::from_row_major(rows, n, x)?, y)?;
    if let Some(mut names) = names {
        let target_name = names.remove(target);
        ds.feature_names = Some(names);
        ds.target_name = Some(target_name);
    }
    Ok(ds)
}

/// Size of the training part: 0.75·N rounded half up.
pub fn train_size(n: usize) -> usize {
    (3 * n + 2) / 4
}

/// Random partition into 75% train / 25% test, drawn without replacement.
/// Each part keeps the original row order.
pub fn split_75_25(ds: &Dataset, rng: &RngStream) -> Result<(Dataset, Dataset)> {
    let n = ds.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 samples to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let k = train_size(n);
    let mut train_idx = order[..k].to_vec();
    let mut test_idx = order[k..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((ds.select(&train_idx)?, ds.select(&test_idx)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// JSON-friendly description of a loaded dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub samples: usize,
    pub arguments: usize,
    pub columns: Vec<ColumnRange>,
}

impl DatasetSummary {
    pub fn of(name: &str, ds: &Dataset) -> Self {
        let mut columns: Vec<ColumnRange> = (0..ds.dim())
            .map(|j| {
                let s = ColumnScaling::fit((0..ds.len()).map(|i| ds.x[(i, j)]), 0.0, 1.0);
                ColumnRange {
                    name: ds
                        .feature_names
                        .as_ref()
                        .map_or_else(|| format!("x{}", j + 1), |n| n[j].clone()),
                    min: s.source_min,
                    max: s.source_max,
                }
            })
            .collect();
        let s = ColumnScaling::fit(ds.y.iter().copied(), 0.0, 1.0);
        columns.push(ColumnRange {
            name: ds.target_name.clone().unwrap_or_else(|| "y".into()),
            min: s.source_min,
            max: s.source_max,
        });
        Self {
            name: name.to_owned(),
            samples: ds.len(),
            arguments: ds.dim(),
            columns,
        }
    }
}
