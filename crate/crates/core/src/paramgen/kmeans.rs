//! Lloyd's k-means with k-means++ seeding, used for cluster-prototype anchors.

use serde::{Deserialize, Serialize};

use super::rng::{index, uniform, RngStream};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansSettings {
    pub max_iterations: usize,
    /// Stop when the total centroid shift falls below this fraction of the
    /// total centroid norm.
    pub relative_tolerance: f64,
}

impl Default for KMeansSettings {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            relative_tolerance: 1e-6,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &Matrix, p: &[f64]) -> (usize, f64) {
    (0..centroids.rows())
        .map(|c| (c, sq_dist(centroids.row(c), p)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus_seeds(x: &Matrix, k: usize, stream: &RngStream) -> Matrix {
    let mut rng = stream.rng();
    let n = x.rows();
    let mut centroids = Matrix::zeros(k, x.cols());
    let first = index(&mut rng, n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = uniform(&mut rng, 0.0, total);
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the final partial sum.
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            index(&mut rng, n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}

/// Clusters the rows of `x` into `k` groups and returns the k×n centroids.
/// Empty clusters keep their previous centroid.
pub fn kmeans(x: &Matrix, k: usize, settings: &KMeansSettings, stream: &RngStream) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::InvalidConfig("k-means needs at least one cluster".into()));
    }
    if x.rows() < k {
        return Err(Error::InvalidConfig(format!(
            "k-means with {k} clusters needs at least {k} points, got {}",
            x.rows()
        )));
    }
    let mut centroids = plus_plus_seeds(x, k, stream);
    let dim = x.cols();
    let mut assignment = vec![usize::MAX; x.rows()];
    for _ in 0..settings.max_iterations {
        let mut changed = false;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let (c, _) = nearest(&centroids, x.row(i));
            if *slot != c {
                *slot = c;
                changed = true;
            }
        }
        let mut sums = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums.row_mut(c).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let mut shift = 0.0;
        let mut norm = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let inv = counts[c] as f64;
            let new: Vec<f64> = sums.row(c).iter().map(|s| s / inv).collect();
            shift += sq_dist(&new, centroids.row(c));
            norm += new.iter().map(|v| v * v).sum::<f64>();
            centroids.row_mut(c).copy_from_slice(&new);
        }
        let tol = settings.relative_tolerance;
        if !changed || shift <= tol * tol * norm.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(centroids)
}
