//! Direct hidden-parameter generators.
//!
//! Both generators draw slopes at random and then place each sigmoid's
//! inflection at an anchor point `x*` inside the input hypercube by setting
//! `b = -aᵀx*`:
//!
//! * [`generate_ram`] draws every weight from `U(-u, u)`.
//! * [`generate_ralpham`] draws slope angles `|α| ~ U(α_min, α_max)` with a
//!   random sign and maps them to weights with `a = 4 tan α` (4 is the
//!   inverse of the logistic slope at its inflection point).

mod kmeans;
mod rng;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, KMeansSettings};
pub use rng::RngStream;
pub(crate) use rng::{index, uniform};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{node_dot, HiddenLayer};

/// Axis-aligned box `[lower_j, upper_j]` per input dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypercube {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Hypercube {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "hypercube bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidInput("hypercube needs finite min <= max".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }

    fn clamp_into(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// Per-dimension min/max over the rows of `x`.
pub fn input_hypercube(x: &Matrix) -> Result<Hypercube> {
    let mut lower = x.row(0).to_vec();
    let mut upper = lower.clone();
    for i in 1..x.rows() {
        for (j, &v) in x.row(i).iter().enumerate() {
            lower[j] = lower[j].min(v);
            upper[j] = upper[j].max(v);
        }
    }
    Hypercube::new(lower, upper)
}

/// Where each node's inflection point is placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorPolicy {
    /// Uniform over the input hypercube.
    UniformInH,
    /// A training point drawn uniformly with replacement.
    #[default]
    RandomTrainingPoint,
    /// Centroids of a k-means clustering of the training inputs into m clusters.
    ClusterPrototype(KMeansSettings),
}

/// Returns `m` anchor points as an m×n matrix.
pub fn anchor_points(
    policy: &AnchorPolicy,
    x_train: &Matrix,
    cube: &Hypercube,
    m: usize,
    stream: &RngStream,
) -> Result<Matrix> {
    let n = cube.dim();
    if x_train.cols() != n {
        return Err(Error::InvalidInput(format!(
            "training inputs have {} columns, hypercube has {n}",
            x_train.cols()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("node count must be positive".into()));
    }
    match policy {
        AnchorPolicy::UniformInH => {
            let mut anchors = Matrix::zeros(m, n);
            for i in 0..m {
                let mut rng = stream.child(i as u64).rng();
                for (j, v) in anchors.row_mut(i).iter_mut().enumerate() {
                    *v = uniform(&mut rng, cube.lower[j], cube.upper[j]);
                }
            }
            Ok(anchors)
        }
        AnchorPolicy::RandomTrainingPoint => {
            let mut anchors = Matrix::zeros(m, n);
            for i in 0..m {
                let pick = index(&mut stream.child(i as u64).rng(), x_train.rows());
                anchors.row_mut(i).copy_from_slice(x_train.row(pick));
            }
            Ok(anchors)
        }
        AnchorPolicy::ClusterPrototype(settings) => {
            let mut centroids = kmeans(x_train, m, settings, stream)?;
            for i in 0..m {
                cube.clamp_into(centroids.row_mut(i));
            }
            Ok(centroids)
        }
    }
}

/// `b_i = -a_iᵀ x*_i` for every node; `weights` is n×m, `anchors` m×n.
pub fn anchored_biases(weights: &Matrix, anchors: &Matrix) -> Result<Vec<f64>> {
    if anchors.rows() != weights.cols() || anchors.cols() != weights.rows() {
        return Err(Error::InvalidInput(format!(
            "{}x{} anchors for a {}x{} weight matrix",
            anchors.rows(),
            anchors.cols(),
            weights.rows(),
            weights.cols()
        )));
    }
    Ok((0..weights.cols())
        .map(|i| -node_dot(weights, i, anchors.row(i)))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaMConfig {
    /// Weights are drawn from `U(-u, u)`.
    pub u: f64,
    #[serde(default)]
    pub anchor: AnchorPolicy,
}

impl RaMConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.u.is_finite() && self.u > 0.0) {
            return Err(Error::InvalidConfig(format!("u must be positive, got {}", self.u)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RAlphaMConfig {
    #[serde(default)]
    pub alpha_min_deg: f64,
    pub alpha_max_deg: f64,
    #[serde(default)]
    pub anchor: AnchorPolicy,
}

impl RAlphaMConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.alpha_min_deg, self.alpha_max_deg);
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 90.0) {
            return Err(Error::InvalidConfig(format!(
                "slope angles need 0 <= alpha_min < alpha_max <= 90, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Largest weight magnitude RαM will emit: `4 tan 89.99°`.
pub fn max_abs_angle_weight() -> f64 {
    4.0 * 89.99f64.to_radians().tan()
}

/// Weight for slope angle `alpha_deg`.
pub fn angle_to_weight(alpha_deg: f64) -> f64 {
    let cap = max_abs_angle_weight();
    (4.0 * alpha_deg.to_radians().tan()).clamp(-cap, cap)
}

/// Slope angle of a sigmoid with weight `a`, in degrees.
pub fn weight_to_angle(a: f64) -> f64 {
    (a / 4.0).atan().to_degrees()
}

/// A generated layer together with the anchors its biases were built from.
#[derive(Clone, Debug)]
pub struct AnchoredLayer {
    pub hidden: HiddenLayer,
    /// m×n, row i is node i's inflection point.
    pub anchors: Matrix,
}

const WEIGHT_STREAM: u64 = 0;
const ANCHOR_STREAM: u64 = 1;

fn check_inputs(x_train: &Matrix, cube: &Hypercube, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("node count must be positive".into()));
    }
    if x_train.cols() != cube.dim() {
        return Err(Error::InvalidInput(format!(
            "training inputs have {} columns, hypercube has {}",
            x_train.cols(),
            cube.dim()
        )));
    }
    Ok(())
}

/// n×m weights where node `i` draws its column from `stream.child(i)`.
pub(crate) fn node_weights(
    n: usize,
    m: usize,
    stream: &RngStream,
    mut draw: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> f64,
) -> Matrix {
    let mut w = Matrix::zeros(n, m);
    for i in 0..m {
        let mut rng = stream.child(i as u64).rng();
        for j in 0..n {
            w[(j, i)] = draw(&mut rng);
        }
    }
    w
}

fn anchored(
    weights: Matrix,
    policy: &AnchorPolicy,
    x_train: &Matrix,
    cube: &Hypercube,
    stream: &RngStream,
) -> Result<AnchoredLayer> {
    let anchors = anchor_points(policy, x_train, cube, weights.cols(), &stream.child(ANCHOR_STREAM))?;
    let biases = anchored_biases(&weights, &anchors)?;
    Ok(AnchoredLayer {
        hidden: HiddenLayer::new(weights, biases)?,
        anchors,
    })
}

/// Random weights method: `a ~ U(-u, u)`, anchored biases.
pub fn generate_ram(
    cfg: &RaMConfig,
    x_train: &Matrix,
    cube: &Hypercube,
    m: usize,
    stream: &RngStream,
) -> Result<AnchoredLayer> {
    cfg.validate()?;
    check_inputs(x_train, cube, m)?;
    let u = cfg.u;
    let weights = node_weights(cube.dim(), m, &stream.child(WEIGHT_STREAM), |rng| {
        uniform(rng, -u, u)
    });
    anchored(weights, &cfg.anchor, x_train, cube, stream)
}

/// Random slope-angle method: `|α| ~ U(α_min, α_max)`, independent random
/// sign per weight, `a = 4 tan α`, anchored biases.
pub fn generate_ralpham(
    cfg: &RAlphaMConfig,
    x_train: &Matrix,
    cube: &Hypercube,
    m: usize,
    stream: &RngStream,
) -> Result<AnchoredLayer> {
    cfg.validate()?;
    check_inputs(x_train, cube, m)?;
    let (lo, hi) = (cfg.alpha_min_deg, cfg.alpha_max_deg);
    let weights = node_weights(cube.dim(), m, &stream.child(WEIGHT_STREAM), |rng| {
        let alpha = uniform(rng, lo, hi);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        sign * angle_to_weight(alpha)
    });
    anchored(weights, &cfg.anchor, x_train, cube, stream)
}
