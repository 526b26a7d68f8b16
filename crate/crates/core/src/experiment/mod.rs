//! Reproduction harness: repeated trials, cross-validated grid search,
//! summary statistics, the u_AE sweep and weight histograms.

pub mod config;
mod cv;
mod histogram;
pub mod stats;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, fold_bounds, select_best, CvCell, CvOutcome, GridSearchConfig};
pub use histogram::{weight_histogram, Histogram, HistogramBin};
pub use stats::{wilcoxon_signed_rank, Describe, WilcoxonMethod, WilcoxonResult};

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SolverConfig};
use crate::model::{predict, rmse, HiddenLayer, TrainedNetwork};
use crate::paramgen::{
    generate_ralpham, generate_ram, AnchorPolicy, Hypercube, RAlphaMConfig, RaMConfig, RngStream,
};
use crate::rae::{raem_hidden_layer, RaemVariant};

/// Which generator builds the hidden layer, with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum GeneratorConfig {
    Ram(RaMConfig),
    Ralpham(RAlphaMConfig),
    Raem(RaemVariant),
}

/// A generated hidden layer and what it was derived from.
#[derive(Clone, Debug)]
pub struct GeneratedLayer {
    pub hidden: HiddenLayer,
    /// Anchor points of the FNN biases, when the biases are anchored.
    pub anchors: Option<Matrix>,
    /// RAE decoder weights `V`, for autoencoder-based methods.
    pub decoder: Option<Matrix>,
}

impl GeneratorConfig {
    pub fn ram(u: f64) -> Self {
        GeneratorConfig::Ram(RaMConfig {
            u,
            anchor: AnchorPolicy::default(),
        })
    }

    pub fn ralpham(alpha_min_deg: f64, alpha_max_deg: f64) -> Self {
        GeneratorConfig::Ralpham(RAlphaMConfig {
            alpha_min_deg,
            alpha_max_deg,
            anchor: AnchorPolicy::default(),
        })
    }

    pub fn raem1(u_ae: f64) -> Self {
        GeneratorConfig::Raem(RaemVariant::Raem1 {
            u_ae,
            anchor: AnchorPolicy::default(),
        })
    }

    pub fn raem(variant: RaemVariant) -> Self {
        GeneratorConfig::Raem(variant)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorConfig::Ram(_) => "RaM",
            GeneratorConfig::Ralpham(_) => "RalphaM",
            GeneratorConfig::Raem(v) => v.name(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorConfig::Ram(c) => c.validate(),
            GeneratorConfig::Ralpham(c) => c.validate(),
            GeneratorConfig::Raem(v) => v.validate(),
        }
    }

    /// The tunable interval bound: `u`, `α_max` or `u_AE`. `None` for the
    /// RAEM variants with fixed intervals.
    pub fn interval(&self) -> Option<f64> {
        match self {
            GeneratorConfig::Ram(c) => Some(c.u),
            GeneratorConfig::Ralpham(c) => Some(c.alpha_max_deg),
            GeneratorConfig::Raem(RaemVariant::Raem1 { u_ae, .. }) => Some(*u_ae),
            GeneratorConfig::Raem(_) => None,
        }
    }

    /// Copy with the interval bound replaced; a no-op without one.
    pub fn with_interval(&self, value: f64) -> Self {
        let mut out = *self;
        match &mut out {
            GeneratorConfig::Ram(c) => c.u = value,
            GeneratorConfig::Ralpham(c) => c.alpha_max_deg = value,
            GeneratorConfig::Raem(RaemVariant::Raem1 { u_ae, .. }) => *u_ae = value,
            GeneratorConfig::Raem(_) => {}
        }
        out
    }

    pub fn generate(
        &self,
        x_train: &Matrix,
        cube: &Hypercube,
        m: usize,
        stream: &RngStream,
        solver: &SolverConfig,
    ) -> Result<GeneratedLayer> {
        match self {
            GeneratorConfig::Ram(c) => {
                let g = generate_ram(c, x_train, cube, m, stream)?;
                Ok(GeneratedLayer {
                    hidden: g.hidden,
                    anchors: Some(g.anchors),
                    decoder: None,
                })
            }
            GeneratorConfig::Ralpham(c) => {
                let g = generate_ralpham(c, x_train, cube, m, stream)?;
                Ok(GeneratedLayer {
                    hidden: g.hidden,
                    anchors: Some(g.anchors),
                    decoder: None,
                })
            }
            GeneratorConfig::Raem(v) => {
                let g = raem_hidden_layer(v, x_train, cube, m, stream, solver)?;
                Ok(GeneratedLayer {
                    hidden: g.hidden,
                    anchors: g.anchors,
                    decoder: Some(g.decoder.weights),
                })
            }
        }
    }
}

/// Outcome of one training session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub rmse_train: f64,
    pub rmse_test: f64,
    /// Median of the absolute hidden weights `|a|` (equal to median `|v|`
    /// for the autoencoder methods).
    pub median_abs_weight: f64,
    /// Hidden weights in row-major order, kept on request.
    #[serde(skip)]
    pub weights: Option<Vec<f64>>,
    /// Excluded from every serialized output so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrialOptions {
    pub solver: SolverConfig,
    pub keep_weights: bool,
}

/// Trains on `train` and scores on `train` and `test` with a fresh hidden
/// layer drawn from `stream`.
pub fn run_single(
    method: &GeneratorConfig,
    train: &Dataset,
    test: &Dataset,
    m: usize,
    stream: &RngStream,
    solver: &SolverConfig,
) -> Result<(TrainedNetwork, f64, f64)> {
    let cube = train.hypercube();
    let layer = method.generate(&train.x, &cube, m, stream, solver)?;
    let net = TrainedNetwork::fit(layer.hidden, &train.x, &train.y, solver, None)?;
    let rmse_train = rmse(&predict(&net, &train.x)?, &train.y)?;
    let rmse_test = rmse(&predict(&net, &test.x)?, &test.y)?;
    Ok((net, rmse_train, rmse_test))
}

/// Runs `trials` independent sessions; trial `t` draws from `stream.child(t)`.
/// Trials run concurrently and come back in trial order.
pub fn run_trials(
    method: &GeneratorConfig,
    train: &Dataset,
    test: &Dataset,
    m: usize,
    trials: usize,
    stream: &RngStream,
    opts: &TrialOptions,
) -> Result<Vec<TrialReport>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    method.validate()?;
    if train.dim() != test.dim() {
        return Err(Error::InvalidInput("train and test sets differ in dimension".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let child = stream.child(t as u64);
            let start = Instant::now();
            let (net, rmse_train, rmse_test) =
                run_single(method, train, test, m, &child, &opts.solver)?;
            let weights = net.hidden.weights().as_slice();
            let abs: Vec<f64> = weights.iter().map(|a| a.abs()).collect();
            Ok(TrialReport {
                trial: t,
                seed: child.seed(),
                rmse_train,
                rmse_test,
                median_abs_weight: stats::median(&abs),
                weights: opts.keep_weights.then(|| weights.to_vec()),
                wall_time: start.elapsed(),
            })
        })
        .collect()
}

/// `count` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "log grid needs 0 < lo <= hi and a positive count, got ({lo}, {hi}, {count})"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..count)
        .map(|k| match k {
            0 => lo,
            k if k == count - 1 => hi,
            k => 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64),
        })
        .collect())
}

/// One point of the u_AE sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub u_ae: f64,
    /// Per-trial median of `|v|`, averaged over trials.
    pub median_abs_v: f64,
    pub mean_rmse_test: f64,
    pub std_rmse_test: f64,
}

/// RAEM1 over each `u_AE`. Every grid value reuses the same trial streams,
/// so the points differ only in `u_AE`.
#[allow(clippy::too_many_arguments)]
pub fn uae_sweep(
    train: &Dataset,
    test: &Dataset,
    m: usize,
    uae_values: &[f64],
    trials: usize,
    anchor: AnchorPolicy,
    stream: &RngStream,
    solver: &SolverConfig,
) -> Result<Vec<SweepPoint>> {
    if uae_values.is_empty() {
        return Err(Error::InvalidConfig("u_AE sweep needs at least one value".into()));
    }
    let opts = TrialOptions {
        solver: *solver,
        keep_weights: false,
    };
    uae_values
        .iter()
        .map(|&u_ae| {
            let method = GeneratorConfig::Raem(RaemVariant::Raem1 { u_ae, anchor });
            let reports = run_trials(&method, train, test, m, trials, stream, &opts)?;
            let medians: Vec<f64> = reports.iter().map(|r| r.median_abs_weight).collect();
            let rmses: Vec<f64> = reports.iter().map(|r| r.rmse_test).collect();
            let d = Describe::of(&rmses)?;
            Ok(SweepPoint {
                u_ae,
                median_abs_v: stats::mean(&medians),
                mean_rmse_test: d.mean,
                std_rmse_test: d.std,
            })
        })
        .collect()
}

/// Index of the sweep point with the lowest mean test RMSE (first on ties).
pub fn sweep_minimizer(points: &[SweepPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| p.mean_rmse_test.total_cmp(&q.mean_rmse_test))
        .map(|(k, _)| k)
}
