#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use randfnn::linalg::{pseudoinverse, Matrix, SolverConfig};

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// `rows×cols` matrix of rank at most `rank`, built as a product of two
/// random factors.
pub fn low_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> Matrix {
    random_matrix(rng, rows, rank).matmul(&random_matrix(rng, rank, cols))
}

fn diff_norm(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    diff_norm(a, b) / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Relative residuals of the four Moore-Penrose conditions for `x = a⁺`.
pub fn penrose_residuals(a: &Matrix, x: &Matrix) -> [f64; 4] {
    let ax = a.matmul(x);
    let xa = x.matmul(a);
    [
        rel(&ax.matmul(a), a),
        rel(&xa.matmul(x), x),
        rel(&ax.transpose(), &ax),
        rel(&xa.transpose(), &xa),
    ]
}

pub fn pinv(a: &Matrix) -> Matrix {
    pseudoinverse(a, &SolverConfig::default()).unwrap()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Average ranks of `|d|`, computed by counting rather than sorting.
pub fn average_ranks(d: &[f64]) -> Vec<f64> {
    d.iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided signed-rank p-value by enumerating every sign assignment.
pub fn wilcoxon_enumeration_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let r = average_ranks(&d);
    let observed: f64 = d.iter().zip(&r).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..1 << n {
        let s: f64 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| r[k]).sum();
        le += (s <= observed) as u64;
        ge += (s >= observed) as u64;
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}
