//! Randomization-based autoencoder (RAE) and the RAEM variants that turn its
//! decoder weights into FNN hidden parameters.
//!
//! The RAE has the same node count `m` as the FNN. Its encoder `G = σ(Wᵀx + c)`
//! is random, its decoder `V = G⁺X` (m×n) is fitted by least squares, and the
//! FNN reuses `A = Vᵀ` as hidden weights. Variants differ only in how `W`, `c`
//! and the FNN biases `b` are chosen.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix, SolverConfig};
use crate::model::{sigmoid_layer, HiddenLayer};
use crate::paramgen::{
    anchor_points, anchored_biases, node_weights, uniform, AnchorPolicy, Hypercube, RngStream,
};

/// Encoder weights `W` (n×m) and biases `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaeHidden {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Decoder weights `V` (m×n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaeDecoder {
    pub weights: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RaemVariant {
    /// `w ~ U(-u_AE, u_AE)`, anchored encoder biases, anchored FNN biases.
    Raem1 {
        u_ae: f64,
        #[serde(default)]
        anchor: AnchorPolicy,
    },
    /// `w ~ U(-1, 1)`, anchored encoder biases, anchored FNN biases.
    Raem2 {
        #[serde(default)]
        anchor: AnchorPolicy,
    },
    /// `w, c ~ U(-1, 1)`, anchored FNN biases.
    Raem3 {
        #[serde(default)]
        anchor: AnchorPolicy,
    },
    /// `w, c, b ~ U(-1, 1)`.
    Raem4,
    /// `w, c ~ U(-1, 1)`, `b_i` is the mean of node i's weights.
    Raem5,
}

impl RaemVariant {
    pub fn validate(&self) -> Result<()> {
        if let RaemVariant::Raem1 { u_ae, .. } = self {
            if !(u_ae.is_finite() && *u_ae > 0.0) {
                return Err(Error::InvalidConfig(format!("u_AE must be positive, got {u_ae}")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            RaemVariant::Raem1 { .. } => "RAEM1",
            RaemVariant::Raem2 { .. } => "RAEM2",
            RaemVariant::Raem3 { .. } => "RAEM3",
            RaemVariant::Raem4 => "RAEM4",
            RaemVariant::Raem5 => "RAEM5",
        }
    }

    fn encoder_bound(&self) -> f64 {
        match self {
            RaemVariant::Raem1 { u_ae, .. } => *u_ae,
            _ => 1.0,
        }
    }
}

/// Encoder outputs `G` (N×m): `G[l][i] = σ(w_iᵀx_l + c_i)`.
pub fn rae_encode(encoder: &RaeHidden, x: &Matrix) -> Result<Matrix> {
    sigmoid_layer(&encoder.weights, &encoder.biases, x)
}

/// Least-squares decoder `V = G⁺X`.
pub fn rae_decode_weights(g: &Matrix, x: &Matrix, cfg: &SolverConfig) -> Result<RaeDecoder> {
    if g.rows() != x.rows() {
        return Err(Error::InvalidInput(format!(
            "{} encoder rows but {} data rows",
            g.rows(),
            x.rows()
        )));
    }
    Ok(RaeDecoder {
        weights: lstsq(g, x, cfg)?,
    })
}

/// Everything built by one RAEM run.
#[derive(Clone, Debug)]
pub struct RaemLayer {
    pub hidden: HiddenLayer,
    pub encoder: RaeHidden,
    pub decoder: RaeDecoder,
    /// FNN anchor points (m×n) for the variants with anchored FNN biases.
    pub anchors: Option<Matrix>,
}

const ENCODER_WEIGHTS: u64 = 0;
const ENCODER_ANCHORS: u64 = 1;
const ENCODER_BIASES: u64 = 2;
const FNN_ANCHORS: u64 = 3;
const FNN_BIASES: u64 = 4;

fn uniform_vec(len: usize, lo: f64, hi: f64, stream: &RngStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..len).map(|_| uniform(&mut rng, lo, hi)).collect()
}

/// Builds and trains the RAE for `variant` and returns the resulting FNN
/// hidden layer.
pub fn raem_hidden_layer(
    variant: &RaemVariant,
    x_train: &Matrix,
    cube: &Hypercube,
    m: usize,
    stream: &RngStream,
    cfg: &SolverConfig,
) -> Result<RaemLayer> {
    variant.validate()?;
    if m == 0 {
        return Err(Error::InvalidConfig("node count must be positive".into()));
    }
    let n = x_train.cols();
    if cube.dim() != n {
        return Err(Error::InvalidInput(format!(
            "training inputs have {n} columns, hypercube has {}",
            cube.dim()
        )));
    }

    let bound = variant.encoder_bound();
    let w = node_weights(n, m, &stream.child(ENCODER_WEIGHTS), |rng| {
        uniform(rng, -bound, bound)
    });
    let c = match variant {
        RaemVariant::Raem1 { anchor, .. } | RaemVariant::Raem2 { anchor } => {
            let x_star = anchor_points(anchor, x_train, cube, m, &stream.child(ENCODER_ANCHORS))?;
            anchored_biases(&w, &x_star)?
        }
        _ => uniform_vec(m, -1.0, 1.0, &stream.child(ENCODER_BIASES)),
    };
    let encoder = RaeHidden { weights: w, biases: c };
    let g = rae_encode(&encoder, x_train)?;
    let decoder = rae_decode_weights(&g, x_train, cfg)?;
    let a = decoder.weights.transpose();

    let (b, anchors) = match variant {
        RaemVariant::Raem1 { anchor, .. }
        | RaemVariant::Raem2 { anchor }
        | RaemVariant::Raem3 { anchor } => {
            let x_star = anchor_points(anchor, x_train, cube, m, &stream.child(FNN_ANCHORS))?;
            (anchored_biases(&a, &x_star)?, Some(x_star))
        }
        RaemVariant::Raem4 => (uniform_vec(m, -1.0, 1.0, &stream.child(FNN_BIASES)), None),
        RaemVariant::Raem5 => {
            let b = (0..m)
                .map(|i| (0..n).map(|j| a[(j, i)]).sum::<f64>() / n as f64)
                .collect();
            (b, None)
        }
    };
    Ok(RaemLayer {
        hidden: HiddenLayer::new(a, b)?,
        encoder,
        decoder,
        anchors,
    })
}

/// Signed distance `-b/‖a‖` from the origin to the hyperplane `aᵀx + b = 0`.
pub fn inflection_hyperplane_offset(a: &[f64], b: f64) -> Result<f64> {
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateNode(
            "zero weight vector has no inflection hyperplane".into(),
        ));
    }
    Ok(-b / norm)
}
