//! Dense linear algebra: the [`Matrix`] container, SVD, Moore-Penrose
//! pseudoinverse and least-squares solves.
//!
//! The SVD is computed by `faer` built without its `rayon` feature, so every
//! factorization runs sequentially and is bit-reproducible no matter how many
//! threads the caller uses around it.

use std::ops::{Index, IndexMut};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    /// Single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::from_row_major(values.len(), 1, values.to_vec())
    }

    /// # Panics
    /// Panics when either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// # Panics
    /// Panics when either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Plain `self * rhs`.
    ///
    /// # Panics
    /// Panics on mismatched inner dimensions.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_row_major(indices.len(), self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// How small singular values are cut off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankTolerance {
    /// `max(rows, cols) * sigma_max * f64::EPSILON`.
    #[default]
    Automatic,
    /// Absolute threshold on singular values.
    Explicit(f64),
}

/// Least-squares settings shared by the readout and the autoencoder decoder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rank_tolerance: RankTolerance,
    /// Ridge penalty. `None` gives the plain minimum-norm solution.
    pub ridge_lambda: Option<f64>,
}

impl SolverConfig {
    pub fn ridge(lambda: f64) -> Self {
        Self {
            ridge_lambda: Some(lambda),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let RankTolerance::Explicit(eps) = self.rank_tolerance {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "explicit rank tolerance must be positive, got {eps}"
                )));
            }
        }
        if let Some(lambda) = self.ridge_lambda {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "ridge lambda must be nonnegative, got {lambda}"
                )));
            }
        }
        Ok(())
    }

    fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match self.rank_tolerance {
            RankTolerance::Automatic => rows.max(cols) as f64 * sigma_max * f64::EPSILON,
            RankTolerance::Explicit(eps) => eps,
        }
    }
}

/// Thin SVD `M = U diag(sigma) Vt` with `k = min(rows, cols)` singular values
/// in nonincreasing order.
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub vt: Matrix,
}

impl SvdFactorization {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (v, s) in us.row_mut(i).iter_mut().zip(&self.singular_values) {
                *v *= s;
            }
        }
        us.matmul(&self.vt)
    }

    /// Number of singular values above the cutoff selected by `cfg`.
    pub fn rank(&self, cfg: &SolverConfig) -> usize {
        let sigma_max = self.singular_values.first().copied().unwrap_or(0.0);
        let cutoff = cfg.cutoff(self.u.rows(), self.vt.cols(), sigma_max);
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

struct RawSvd {
    u: Mat<f64>,
    s: Vec<f64>,
    v: Mat<f64>,
}

fn raw_svd(m: &Matrix) -> Result<RawSvd> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let svd = m
        .to_faer()
        .as_ref()
        .thin_svd()
        .map_err(|_| Error::NumericFailure {
            operation: "svd",
            rows: m.rows(),
            cols: m.cols(),
            iterations: None,
        })?;
    let s = svd.S().column_vector().iter().copied().collect();
    Ok(RawSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

pub fn svd(m: &Matrix) -> Result<SvdFactorization> {
    let raw = raw_svd(m)?;
    Ok(SvdFactorization {
        u: Matrix::from_faer(raw.u.as_ref()),
        singular_values: raw.s,
        vt: Matrix::from_faer(raw.v.as_ref().transpose()),
    })
}

/// Moore-Penrose pseudoinverse. Only the rank tolerance of `cfg` is used;
/// singular values at or below it are treated as zero.
pub fn pseudoinverse(m: &Matrix, cfg: &SolverConfig) -> Result<Matrix> {
    cfg.validate()?;
    let raw = raw_svd(m)?;
    let cutoff = cfg.cutoff(m.rows(), m.cols(), raw.s.first().copied().unwrap_or(0.0));
    // V diag(1/sigma) U^T
    let mut v_scaled = raw.v.clone();
    for (k, &s) in raw.s.iter().enumerate() {
        let f = if s > cutoff { 1.0 / s } else { 0.0 };
        for i in 0..v_scaled.nrows() {
            v_scaled[(i, k)] *= f;
        }
    }
    let pinv = &v_scaled * raw.u.transpose();
    Ok(Matrix::from_faer(pinv.as_ref()))
}

/// Solves `min ||M X - T||` column by column.
///
/// Without a ridge penalty this is the minimum-norm solution `M⁺ T`. With
/// `ridge_lambda = λ` it is `(MᵀM + λI)⁻¹ MᵀT`, evaluated through the same SVD
/// as `V diag(σ / (σ² + λ)) Uᵀ T`.
pub fn lstsq(m: &Matrix, t: &Matrix, cfg: &SolverConfig) -> Result<Matrix> {
    cfg.validate()?;
    if m.rows() != t.rows() {
        return Err(Error::InvalidInput(format!(
            "lstsq: system has {} rows but right-hand side has {}",
            m.rows(),
            t.rows()
        )));
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput("right-hand side has non-finite entries".into()));
    }
    let raw = raw_svd(m)?;
    let cutoff = cfg.cutoff(m.rows(), m.cols(), raw.s.first().copied().unwrap_or(0.0));
    let factors: Vec<f64> = raw
        .s
        .iter()
        .map(|&s| match cfg.ridge_lambda {
            Some(lambda) if lambda > 0.0 => s / (s * s + lambda),
            _ if s > cutoff => 1.0 / s,
            _ => 0.0,
        })
        .collect();
    let mut projected = raw.u.transpose() * t.to_faer();
    for (k, f) in factors.iter().enumerate() {
        for j in 0..projected.ncols() {
            projected[(k, j)] *= f;
        }
    }
    let solution = &raw.v * &projected;
    Ok(Matrix::from_faer(solution.as_ref()))
}

/// `lstsq` for a single right-hand-side vector.
pub fn lstsq_vector(m: &Matrix, t: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    if m.rows() != t.len() {
        return Err(Error::InvalidInput(format!(
            "lstsq: system has {} rows but target has {}",
            m.rows(),
            t.len()
        )));
    }
    Ok(lstsq(m, &Matrix::column(t)?, cfg)?.into_vec())
}
