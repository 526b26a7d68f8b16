//! Synthetic target functions TF1-TF3 and their sampled regression problems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataio::{Dataset, NormalizationSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::paramgen::{uniform, Hypercube, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetFunctionId {
    #[serde(rename = "TF1", alias = "tf1")]
    Tf1,
    #[serde(rename = "TF2", alias = "tf2")]
    Tf2,
    #[serde(rename = "TF3", alias = "tf3")]
    Tf3,
}

impl std::fmt::Display for TargetFunctionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetFunctionId::Tf1 => "TF1",
            TargetFunctionId::Tf2 => "TF2",
            TargetFunctionId::Tf3 => "TF3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetFunction {
    pub id: TargetFunctionId,
    pub n: usize,
}

impl TargetFunction {
    pub fn new(id: TargetFunctionId, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("target function needs n >= 1".into()));
        }
        Ok(Self { id, n })
    }

    /// Bounds of one coordinate of the native domain.
    pub fn coordinate_range(&self) -> (f64, f64) {
        match self.id {
            TargetFunctionId::Tf1 => (0.0, 1.0),
            TargetFunctionId::Tf2 => (0.0, PI),
            TargetFunctionId::Tf3 => (-500.0, 500.0),
        }
    }

    pub fn domain(&self) -> Hypercube {
        let (lo, hi) = self.coordinate_range();
        Hypercube::new(vec![lo; self.n], vec![hi; self.n]).expect("bounds are ordered")
    }

    /// Train and test set size per argument count; `None` when the size must
    /// be supplied.
    pub fn default_sample_size(&self) -> Option<usize> {
        match self.n {
            1 | 2 => Some(5000),
            5 => Some(20_000),
            10 => Some(50_000),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "{} expects {} arguments, got {}",
                self.id,
                self.n,
                x.len()
            )));
        }
        if !self.domain().contains(x) {
            return Err(Error::InvalidInput(format!("{x:?} lies outside the domain of {}", self.id)));
        }
        Ok(self.evaluate_unchecked(x))
    }

    fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        match self.id {
            TargetFunctionId::Tf1 => x.iter().map(|&v| (20.0 * v.exp()).sin() * v * v).sum(),
            TargetFunctionId::Tf2 => -x
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let k = (i + 1) as f64;
                    v.sin() * (k * v * v / PI).sin().powi(20)
                })
                .sum::<f64>(),
            TargetFunctionId::Tf3 => {
                418.9829 * self.n as f64 - x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<f64>()
            }
        }
    }
}

/// Normalized train/test sets plus the raw samples they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProblem {
    pub target: TargetFunction,
    pub train: Dataset,
    pub test: Dataset,
    pub raw_train: Dataset,
    pub raw_test: Dataset,
    pub normalization: NormalizationSpec,
}

fn sample_raw(tf: &TargetFunction, size: usize, stream: &RngStream) -> Result<Dataset> {
    let (lo, hi) = tf.coordinate_range();
    let mut rng = stream.rng();
    let x = Matrix::from_fn(size, tf.n, |_, _| uniform(&mut rng, lo, hi));
    let y = (0..size).map(|l| tf.evaluate_unchecked(x.row(l))).collect();
    Dataset::new(x, y)
}

/// Draws uniform train and test sets over the native domain and maps them to
/// inputs in `[0, 1]` and outputs in `[-1, 1]` using training-set extremes.
pub fn sample_problem(tf: &TargetFunction, size: Option<usize>, stream: &RngStream) -> Result<SampledProblem> {
    let size = size.or(tf.default_sample_size()).ok_or_else(|| {
        Error::InvalidConfig(format!("no default sample size for n = {}; supply one", tf.n))
    })?;
    if size == 0 {
        return Err(Error::InvalidConfig("sample size must be positive".into()));
    }
    let raw_train = sample_raw(tf, size, &stream.child(0))?;
    let raw_test = sample_raw(tf, size, &stream.child(1))?;
    let normalization = NormalizationSpec::fit(&raw_train, (0.0, 1.0), (-1.0, 1.0));
    Ok(SampledProblem {
        target: *tf,
        train: normalization.apply(&raw_train)?,
        test: normalization.apply(&raw_test)?,
        raw_train,
        raw_test,
        normalization,
    })
}
