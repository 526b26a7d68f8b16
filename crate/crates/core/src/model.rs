//! Single-hidden-layer sigmoid network with a linear output node and no
//! output bias: `f(x) = Σ_i β_i σ(a_iᵀx + b_i)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::NormalizationSpec;
use crate::error::{Error, Result};
use crate::linalg::{lstsq_vector, Matrix, SolverConfig};

/// Logistic function, evaluated in the branch that cannot overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `Σ_j weights[j, node] * x[j]`, summed in column order.
///
/// Layer evaluation and the anchored bias formula both go through this sum,
/// so a node evaluated at its own anchor has pre-activation exactly zero.
pub(crate) fn node_dot(weights: &Matrix, node: usize, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        acc += weights[(j, node)] * xj;
    }
    acc
}

/// Rows of `x` per parallel work unit in [`sigmoid_layer`].
const ROW_BLOCK: usize = 256;

/// `σ(Wᵀx_l + c)` for every row of `x`; `weights` is n×m, output N×m.
pub(crate) fn sigmoid_layer(weights: &Matrix, biases: &[f64], x: &Matrix) -> Result<Matrix> {
    let (n, m) = weights.shape();
    if x.cols() != n {
        return Err(Error::InvalidInput(format!(
            "inputs have {} columns, layer expects {n}",
            x.cols()
        )));
    }
    if biases.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} biases for {m} nodes",
            biases.len()
        )));
    }
    let mut out = Matrix::zeros(x.rows(), m);
    let rows = x.rows();
    out.as_mut_slice()
        .par_chunks_mut(ROW_BLOCK * m)
        .enumerate()
        .for_each(|(block, chunk)| {
            let first = block * ROW_BLOCK;
            for (r, out_row) in chunk.chunks_mut(m).enumerate() {
                let l = first + r;
                debug_assert!(l < rows);
                let xl = x.row(l);
                // Same accumulation order as `node_dot`: start at 0, add the
                // j-th product in increasing j.
                out_row.fill(0.0);
                for (j, &xj) in xl.iter().enumerate() {
                    for (z, &a) in out_row.iter_mut().zip(weights.row(j)) {
                        *z += a * xj;
                    }
                }
                for (z, &b) in out_row.iter_mut().zip(biases) {
                    *z = sigmoid(*z + b);
                }
            }
        });
    Ok(out)
}

/// Hidden weights `A` (n×m, column i holds node i) and biases `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenLayer {
    weights: Matrix,
    biases: Vec<f64>,
}

impl HiddenLayer {
    pub fn new(weights: Matrix, biases: Vec<f64>) -> Result<Self> {
        if biases.len() != weights.cols() {
            return Err(Error::InvalidInput(format!(
                "{} biases for {} nodes",
                biases.len(),
                weights.cols()
            )));
        }
        if !weights.is_finite() || biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("hidden layer has non-finite parameters".into()));
        }
        Ok(Self { weights, biases })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn node_count(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn node_weights(&self, node: usize) -> Vec<f64> {
        self.weights.column_values(node)
    }

    /// `a_iᵀx + b_i`.
    pub fn pre_activation(&self, node: usize, x: &[f64]) -> f64 {
        node_dot(&self.weights, node, x) + self.biases[node]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    pub beta: Vec<f64>,
}

/// The hidden-layer output matrix `H` (N×m).
pub fn hidden_outputs(layer: &HiddenLayer, x: &Matrix) -> Result<Matrix> {
    sigmoid_layer(&layer.weights, &layer.biases, x)
}

/// `β = H⁺Y` (or its ridge variant when `cfg` carries a penalty).
pub fn train_readout(
    layer: &HiddenLayer,
    x: &Matrix,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<ReadoutWeights> {
    if x.rows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} input rows but {} targets",
            x.rows(),
            y.len()
        )));
    }
    let h = hidden_outputs(layer, x)?;
    let beta = lstsq_vector(&h, y, cfg)?;
    Ok(ReadoutWeights { beta })
}

/// Hidden layer, readout and the normalization of the data it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedNetwork {
    pub hidden: HiddenLayer,
    pub readout: ReadoutWeights,
    pub normalization: Option<NormalizationSpec>,
}

impl TrainedNetwork {
    pub fn new(
        hidden: HiddenLayer,
        readout: ReadoutWeights,
        normalization: Option<NormalizationSpec>,
    ) -> Result<Self> {
        if readout.beta.len() != hidden.node_count() {
            return Err(Error::InvalidInput(format!(
                "{} output weights for {} nodes",
                readout.beta.len(),
                hidden.node_count()
            )));
        }
        if readout.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("non-finite output weight".into()));
        }
        if let Some(spec) = &normalization {
            if spec.inputs.len() != hidden.input_dim() {
                return Err(Error::InvalidInput(
                    "normalization and hidden layer disagree on input dimension".into(),
                ));
            }
        }
        Ok(Self {
            hidden,
            readout,
            normalization,
        })
    }

    /// Fits the readout of `hidden` on `(x, y)`.
    pub fn fit(
        hidden: HiddenLayer,
        x: &Matrix,
        y: &[f64],
        cfg: &SolverConfig,
        normalization: Option<NormalizationSpec>,
    ) -> Result<Self> {
        let readout = train_readout(&hidden, x, y, cfg)?;
        Self::new(hidden, readout, normalization)
    }

    /// Predicts on inputs in the original (unnormalized) units and returns
    /// outputs in original units.
    pub fn predict_raw(&self, x: &Matrix) -> Result<Vec<f64>> {
        match &self.normalization {
            None => predict(self, x),
            Some(spec) => {
                let xn = spec.apply_inputs(x)?;
                Ok(spec.denormalize_output(&predict(self, &xn)?))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        file.into_network()
    }
}

/// Predictions in the space the network was trained in.
pub fn predict(net: &TrainedNetwork, x: &Matrix) -> Result<Vec<f64>> {
    let h = hidden_outputs(&net.hidden, x)?;
    Ok((0..h.rows())
        .map(|l| {
            h.row(l)
                .iter()
                .zip(&net.readout.beta)
                .map(|(hv, b)| hv * b)
                .sum()
        })
        .collect())
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::InvalidInput(format!(
            "rmse over vectors of length {} and {}",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidInput("rmse of empty vectors".into()));
    }
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// On-disk network layout. Reals are written as shortest round-trip
/// decimals, so reading back yields the identical bits.
#[derive(Serialize, Deserialize)]
struct NetworkFile {
    input_dim: usize,
    node_count: usize,
    /// A, row-major n×m.
    weights: Vec<f64>,
    biases: Vec<f64>,
    beta: Vec<f64>,
    normalization: Option<NormalizationSpec>,
}

impl From<&TrainedNetwork> for NetworkFile {
    fn from(net: &TrainedNetwork) -> Self {
        Self {
            input_dim: net.hidden.input_dim(),
            node_count: net.hidden.node_count(),
            weights: net.hidden.weights.as_slice().to_vec(),
            biases: net.hidden.biases.clone(),
            beta: net.readout.beta.clone(),
            normalization: net.normalization.clone(),
        }
    }
}

impl NetworkFile {
    fn into_network(self) -> Result<TrainedNetwork> {
        let weights = Matrix::from_row_major(self.input_dim, self.node_count, self.weights)?;
        let hidden = HiddenLayer::new(weights, self.biases)?;
        TrainedNetwork::new(hidden, ReadoutWeights { beta: self.beta }, self.normalization)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_layer(rng: &mut ChaCha8Rng, n: usize, m: usize) -> HiddenLayer {
        let w = Matrix::from_fn(n, m, |_, _| rng.gen_range(-5.0..5.0));
        let b = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        HiddenLayer::new(w, b).unwrap()
    }

    #[test]
    fn sigmoid_reference_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(50.0) - 1.0).abs() <= 1e-15);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() <= 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert!(sigmoid(800.0) == 1.0);
    }

    #[test]
    fn single_node_at_origin() {
        let layer = HiddenLayer::new(Matrix::from_rows(&[[1.0]]).unwrap(), vec![0.0]).unwrap();
        let h = hidden_outputs(&layer, &Matrix::from_rows(&[[0.0]]).unwrap()).unwrap();
        assert_eq!(h[(0, 0)], 0.5);
    }

    #[test]
    fn anchored_node_outputs_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Matrix::from_fn(3, 1, |_, _| rng.gen_range(-30.0..30.0));
        let anchor = [0.13, 0.77, 0.41];
        let b = -node_dot(&a, 0, &anchor);
        let layer = HiddenLayer::new(a, vec![b]).unwrap();
        let h = hidden_outputs(&layer, &Matrix::from_rows(&[anchor]).unwrap()).unwrap();
        assert_eq!(h[(0, 0)], 0.5);
    }

    #[test]
    fn hidden_outputs_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layer = random_layer(&mut rng, 4, 3);
        let x = Matrix::from_fn(5, 4, |_, _| rng.gen_range(0.0..1.0));
        let h = hidden_outputs(&layer, &x).unwrap();
        for l in 0..5 {
            for i in 0..3 {
                let mut z = layer.biases()[i];
                for j in 0..4 {
                    z += layer.weights()[(j, i)] * x[(l, j)];
                }
                let oracle = 1.0 / (1.0 + (-z).exp());
                assert!((h[(l, i)] - oracle).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn hidden_outputs_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layer = random_layer(&mut rng, 4, 3);
        assert!(matches!(
            hidden_outputs(&layer, &Matrix::zeros(2, 3)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn readout_solves_square_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let layer = random_layer(&mut rng, 1, 4);
        let x = Matrix::column(&[0.0, 0.3, 0.6, 0.9]).unwrap();
        let y = [0.5, -1.0, 2.0, 0.1];
        let beta = train_readout(&layer, &x, &y, &SolverConfig::default()).unwrap();
        let h = hidden_outputs(&layer, &x).unwrap();
        let fitted = h.matmul(&Matrix::column(&beta.beta).unwrap());
        for (f, t) in fitted.as_slice().iter().zip(&y) {
            assert!((f - t).abs() <= 1e-10);
        }
    }

    #[test]
    fn readout_recovers_planted_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let layer = random_layer(&mut rng, 2, 5);
        let x = Matrix::from_fn(60, 2, |_, _| rng.gen_range(0.0..1.0));
        let z = [1.0, -2.0, 0.5, 3.0, -0.75];
        let h = hidden_outputs(&layer, &x).unwrap();
        let y: Vec<f64> = (0..60)
            .map(|l| h.row(l).iter().zip(&z).map(|(a, b)| a * b).sum())
            .collect();
        let beta = train_readout(&layer, &x, &y, &SolverConfig::default()).unwrap();
        for (b, t) in beta.beta.iter().zip(&z) {
            assert!((b - t).abs() <= 1e-8, "{b} vs {t}");
        }
    }

    #[test]
    fn zero_targets_give_zero_readout() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let layer = random_layer(&mut rng, 2, 6);
        let x = Matrix::from_fn(20, 2, |_, _| rng.gen_range(0.0..1.0));
        let beta = train_readout(&layer, &x, &[0.0; 20], &SolverConfig::default()).unwrap();
        assert!(beta.beta.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn predict_reference_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let layer = random_layer(&mut rng, 2, 3);
        let net = TrainedNetwork::new(
            layer.clone(),
            ReadoutWeights {
                beta: vec![0.0; 3],
            },
            None,
        )
        .unwrap();
        let x = Matrix::from_fn(10, 2, |_, _| rng.gen_range(0.0..1.0));
        assert!(predict(&net, &x).unwrap().iter().all(|&p| p == 0.0));

        let beta = vec![0.7, -1.1, 2.3];
        let net = TrainedNetwork::new(layer.clone(), ReadoutWeights { beta: beta.clone() }, None)
            .unwrap();
        let p = predict(&net, &x).unwrap();
        for l in 0..10 {
            let mut s = 0.0;
            for i in 0..3 {
                let z = layer.weights()[(0, i)] * x[(l, 0)]
                    + layer.weights()[(1, i)] * x[(l, 1)]
                    + layer.biases()[i];
                s += beta[i] / (1.0 + (-z).exp());
            }
            assert!((p[l] - s).abs() <= 1e-14);
        }

        let a = Matrix::from_rows(&[[3.0]]).unwrap();
        let single = HiddenLayer::new(a, vec![-3.0 * 0.4]).unwrap();
        let net = TrainedNetwork::new(single, ReadoutWeights { beta: vec![2.0] }, None).unwrap();
        let p = predict(&net, &Matrix::from_rows(&[[0.4]]).unwrap()).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn rmse_reference_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[1.0], &[0.0]).unwrap(), 1.0);
        assert!(rmse(&[1.0], &[0.0, 1.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn network_json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let layer = random_layer(&mut rng, 3, 7);
        let beta = (0..7).map(|_| rng.gen::<f64>() * 1e-7 - 3.3e5).collect();
        let net = TrainedNetwork::new(layer, ReadoutWeights { beta }, None).unwrap();
        let back = TrainedNetwork::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
        let text = net.to_json().unwrap();
        assert!(text.contains("\"input_dim\": 3") && text.contains("\"node_count\": 7"));
    }
}
