//! Experiment configuration file and the pipelines behind the CLI.
//!
//! Output files (all deterministic; reals in CSV carry 17 significant digits):
//!
//! * `summary.json`: [`ExperimentSummary`].
//! * `trials.csv`: `method,trial,seed,nodes,interval,rmse_train,rmse_test,median_abs_weight`.
//! * `cv.csv`: `method,nodes,interval,mean_rmse`.
//! * `sweep.csv`: `u_ae,median_abs_v,mean_rmse_test,std_rmse_test`.
//! * `histogram.csv`: `bin_left,bin_right,count`.
//! * `train.csv` / `test.csv`: `x1..xn,y` (normalized samples).
//!
//! With JSON output selected, each table is written as a `.json` array of
//! records instead.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::Describe;
use super::{
    cross_validate, log_grid, run_trials, uae_sweep, weight_histogram, wilcoxon_signed_rank,
    CvCell, GeneratorConfig, GridSearchConfig, Histogram, SweepPoint, TrialOptions, TrialReport,
    WilcoxonResult,
};
use crate::benchfn::{sample_problem, TargetFunction, TargetFunctionId};
use crate::dataio::{load_csv, split_75_25, CsvOptions, Dataset, DatasetSummary, NormalizationSpec};
use crate::error::{Error, Result};
use crate::linalg::SolverConfig;
use crate::model::TrainedNetwork;
use crate::paramgen::{AnchorPolicy, RngStream};
use crate::rae::RaemVariant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemConfig {
    Synthetic {
        function: TargetFunctionId,
        n: usize,
        /// Train and test size; defaults to the size table for n.
        #[serde(default)]
        size: Option<usize>,
    },
    File {
        path: PathBuf,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        header: bool,
        #[serde(default)]
        delimiter: Option<char>,
        #[serde(default)]
        target_column: Option<usize>,
    },
}

impl ProblemConfig {
    pub fn name(&self) -> String {
        match self {
            ProblemConfig::Synthetic { function, n, .. } => format!("{function}_n{n}"),
            ProblemConfig::File { path, name, .. } => name.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map_or_else(|| "data".into(), |s| s.to_string_lossy().into_owned())
            }),
        }
    }
}

/// Per-family search grids. Empty node counts fall back to `nodes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub node_counts: Vec<usize>,
    pub u_grid: Vec<f64>,
    pub u_ae_grid: Vec<f64>,
    pub alpha_max_grid: Vec<f64>,
    pub folds: usize,
    pub trials_per_cell: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            node_counts: Vec::new(),
            u_grid: log_grid(1e-2, 1e2, 9).expect("valid grid"),
            u_ae_grid: default_u_ae_grid(),
            alpha_max_grid: (1..=9).map(|k| 10.0 * k as f64).collect(),
            folds: 5,
            trials_per_cell: 3,
        }
    }
}

impl GridConfig {
    /// Interval grid matching the method family.
    pub fn interval_grid(&self, method: &GeneratorConfig) -> Vec<f64> {
        match method {
            GeneratorConfig::Ram(_) => self.u_grid.clone(),
            GeneratorConfig::Ralpham(_) => self.alpha_max_grid.clone(),
            GeneratorConfig::Raem(RaemVariant::Raem1 { .. }) => self.u_ae_grid.clone(),
            GeneratorConfig::Raem(_) => Vec::new(),
        }
    }
}

pub fn default_u_ae_grid() -> Vec<f64> {
    log_grid(1e-5, 1e1, 25).expect("valid grid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Node count for the sweep; `nodes` when absent.
    pub nodes: Option<usize>,
    pub u_ae_grid: Vec<f64>,
    pub anchor: AnchorPolicy,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            nodes: None,
            u_ae_grid: default_u_ae_grid(),
            anchor: AnchorPolicy::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub methods: Vec<GeneratorConfig>,
    pub nodes: usize,
    /// Cross-validated tuning before the final trials, when present.
    pub grid: Option<GridConfig>,
    pub trials: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub histogram_bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::Synthetic {
                function: TargetFunctionId::Tf1,
                n: 2,
                size: None,
            },
            methods: vec![GeneratorConfig::ralpham(0.0, 90.0)],
            nodes: 100,
            grid: None,
            trials: 100,
            seed: 0,
            output_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
            solver: SolverConfig::default(),
            sweep: SweepConfig::default(),
            histogram_bins: 50,
        }
    }
}

impl ExperimentConfig {
    /// Reads a JSON config. A relative data path is taken relative to the
    /// config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if let ProblemConfig::File { path: data, .. } = &mut cfg.problem {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        if self.nodes == 0 {
            return Err(Error::InvalidConfig("nodes must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidConfig("histogram_bins must be positive".into()));
        }
        if let ProblemConfig::Synthetic { n, .. } = self.problem {
            if n == 0 {
                return Err(Error::InvalidConfig("synthetic problem needs n >= 1".into()));
            }
        }
        self.solver.validate()
    }
}

/// Method names accepted on the command line.
pub fn method_from_name(name: &str) -> Result<GeneratorConfig> {
    let anchor = AnchorPolicy::default();
    Ok(match name.to_ascii_lowercase().as_str() {
        "ram" => GeneratorConfig::ram(1.0),
        "ralpham" => GeneratorConfig::ralpham(0.0, 90.0),
        "raem1" => GeneratorConfig::raem1(0.1),
        "raem2" => GeneratorConfig::raem(RaemVariant::Raem2 { anchor }),
        "raem3" => GeneratorConfig::raem(RaemVariant::Raem3 { anchor }),
        "raem4" => GeneratorConfig::raem(RaemVariant::Raem4),
        "raem5" => GeneratorConfig::raem(RaemVariant::Raem5),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected ram, ralpham, raem1..raem5)"
            )))
        }
    })
}

/// Normalized train/test sets ready for training.
#[derive(Clone, Debug)]
pub struct PreparedProblem {
    pub name: String,
    pub train: Dataset,
    pub test: Dataset,
    pub normalization: NormalizationSpec,
    pub raw: Option<DatasetSummary>,
}

const PROBLEM_STREAM: u64 = 0;
const GRID_STREAM: u64 = 1;
const TRIAL_STREAM: u64 = 2;
const SWEEP_STREAM: u64 = 3;

/// Samples a synthetic problem, or loads, splits 75/25 and normalizes a data
/// file (inputs and target onto `[0, 1]`, fitted on the training part).
pub fn prepare_problem(cfg: &ExperimentConfig) -> Result<PreparedProblem> {
    let stream = RngStream::new(cfg.seed).child(PROBLEM_STREAM);
    match &cfg.problem {
        ProblemConfig::Synthetic { function, n, size } => {
            let tf = TargetFunction::new(*function, *n)?;
            let p = sample_problem(&tf, *size, &stream)?;
            Ok(PreparedProblem {
                name: cfg.problem.name(),
                train: p.train,
                test: p.test,
                normalization: p.normalization,
                raw: None,
            })
        }
        ProblemConfig::File {
            path,
            header,
            delimiter,
            target_column,
            ..
        } => {
            let delimiter = match delimiter {
                None => b',',
                Some(c) if c.is_ascii() => *c as u8,
                Some(c) => {
                    return Err(Error::InvalidConfig(format!("delimiter {c:?} is not ASCII")))
                }
            };
            let opts = CsvOptions {
                delimiter,
                header: *header,
                target_column: *target_column,
            };
            let ds = load_csv(path, &opts)?;
            let name = cfg.problem.name();
            let summary = DatasetSummary::of(&name, &ds);
            let (train, test) = split_75_25(&ds, &stream)?;
            let normalization = NormalizationSpec::fit(&train, (0.0, 1.0), (0.0, 1.0));
            Ok(PreparedProblem {
                name,
                train: normalization.apply(&train)?,
                test: normalization.apply(&test)?,
                normalization,
                raw: Some(summary),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub config: GeneratorConfig,
    pub nodes: usize,
    /// Winning grid cell, when the method was tuned.
    pub selected: Option<CvCell>,
    pub rmse_test: Describe,
    pub rmse_train: Describe,
    pub median_abs_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub first: String,
    pub second: String,
    #[serde(flatten)]
    pub result: WilcoxonResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub problem: String,
    pub dataset: Option<DatasetSummary>,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
    pub trials: usize,
    pub methods: Vec<MethodSummary>,
    /// Two-sided Wilcoxon tests on paired test RMSE for every method pair;
    /// empty with fewer than 6 trials.
    pub pairwise: Vec<PairwiseTest>,
}

/// Full results of a comparison run.
#[derive(Clone, Debug)]
pub struct ComparisonRun {
    pub summary: ExperimentSummary,
    /// Per-method trial reports, in method order.
    pub reports: Vec<(GeneratorConfig, usize, Vec<TrialReport>)>,
    /// Per-method CV tables for the tuned methods.
    pub cv_tables: Vec<(String, Vec<CvCell>)>,
}

/// Cross-validated choice of node count and interval for one method.
pub fn tune_method(
    cfg: &ExperimentConfig,
    grid: &GridConfig,
    index: usize,
    train: &Dataset,
) -> Result<super::CvOutcome> {
    let method = &cfg.methods[index];
    let node_counts = if grid.node_counts.is_empty() {
        vec![cfg.nodes]
    } else {
        grid.node_counts.clone()
    };
    let search = GridSearchConfig {
        node_counts,
        interval_grid: grid.interval_grid(method),
        folds: grid.folds,
        trials_per_cell: grid.trials_per_cell,
        seed: RngStream::new(cfg.seed)
            .child(GRID_STREAM)
            .child(index as u64)
            .seed(),
    };
    cross_validate(&search, method, train, &cfg.solver)
}

/// Optional tuning, then `trials` sessions per method on the same trial
/// streams, then summary statistics and pairwise tests.
pub fn compare(cfg: &ExperimentConfig, problem: &PreparedProblem, keep_weights: bool) -> Result<ComparisonRun> {
    cfg.validate()?;
    let trial_stream = RngStream::new(cfg.seed).child(TRIAL_STREAM);
    let opts = TrialOptions {
        solver: cfg.solver,
        keep_weights,
    };
    let mut methods = Vec::new();
    let mut reports = Vec::new();
    let mut cv_tables = Vec::new();
    for (index, template) in cfg.methods.iter().enumerate() {
        let (method, nodes, selected) = match &cfg.grid {
            Some(grid) => {
                let outcome = tune_method(cfg, grid, index, &problem.train)?;
                cv_tables.push((template.name().to_string(), outcome.table.clone()));
                (outcome.tuned(template), outcome.best.nodes, Some(outcome.best))
            }
            None => (*template, cfg.nodes, None),
        };
        let runs = run_trials(&method, &problem.train, &problem.test, nodes, cfg.trials, &trial_stream, &opts)?;
        let test: Vec<f64> = runs.iter().map(|r| r.rmse_test).collect();
        let train: Vec<f64> = runs.iter().map(|r| r.rmse_train).collect();
        let medians: Vec<f64> = runs.iter().map(|r| r.median_abs_weight).collect();
        methods.push(MethodSummary {
            method: method.name().to_string(),
            config: method,
            nodes,
            selected,
            rmse_test: Describe::of(&test)?,
            rmse_train: Describe::of(&train)?,
            median_abs_weight: super::stats::mean(&medians),
        });
        reports.push((method, nodes, runs));
    }

    let mut pairwise = Vec::new();
    if cfg.trials >= 6 {
        for i in 0..reports.len() {
            for j in i + 1..reports.len() {
                let a: Vec<f64> = reports[i].2.iter().map(|r| r.rmse_test).collect();
                let b: Vec<f64> = reports[j].2.iter().map(|r| r.rmse_test).collect();
                pairwise.push(PairwiseTest {
                    first: methods[i].method.clone(),
                    second: methods[j].method.clone(),
                    result: wilcoxon_signed_rank(&a, &b)?,
                });
            }
        }
    }

    Ok(ComparisonRun {
        summary: ExperimentSummary {
            problem: problem.name.clone(),
            dataset: problem.raw.clone(),
            train_size: problem.train.len(),
            test_size: problem.test.len(),
            seed: cfg.seed,
            trials: cfg.trials,
            methods,
            pairwise,
        },
        reports,
        cv_tables,
    })
}

/// Trains one network with the first method and returns it with its test RMSE.
pub fn fit_one(cfg: &ExperimentConfig, problem: &PreparedProblem) -> Result<(TrainedNetwork, f64, f64)> {
    cfg.validate()?;
    let method = &cfg.methods[0];
    let stream = RngStream::new(cfg.seed).child(TRIAL_STREAM).child(0);
    let (net, rmse_train, rmse_test) =
        super::run_single(method, &problem.train, &problem.test, cfg.nodes, &stream, &cfg.solver)?;
    let net = TrainedNetwork::new(net.hidden, net.readout, Some(problem.normalization.clone()))?;
    Ok((net, rmse_train, rmse_test))
}

/// u_AE sweep of RAEM1 on the configured problem.
pub fn sweep(cfg: &ExperimentConfig, problem: &PreparedProblem) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    uae_sweep(
        &problem.train,
        &problem.test,
        cfg.sweep.nodes.unwrap_or(cfg.nodes),
        &cfg.sweep.u_ae_grid,
        cfg.trials,
        cfg.sweep.anchor,
        &RngStream::new(cfg.seed).child(SWEEP_STREAM),
        &cfg.solver,
    )
}

/// Pooled hidden-weight histogram of the first method.
pub fn histogram(cfg: &ExperimentConfig, problem: &PreparedProblem) -> Result<Histogram> {
    cfg.validate()?;
    let opts = TrialOptions {
        solver: cfg.solver,
        keep_weights: true,
    };
    let stream = RngStream::new(cfg.seed).child(TRIAL_STREAM);
    let reports = run_trials(&cfg.methods[0], &problem.train, &problem.test, cfg.nodes, cfg.trials, &stream, &opts)?;
    weight_histogram(&reports, cfg.histogram_bins)
}

// ---- output writers ----

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}

/// Writes `rows` as `<stem>.csv` or `<stem>.json`. Returns the file name.
fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    header: &[&str],
    rows: &[T],
    to_record: impl Fn(&T) -> Vec<String>,
) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let name = format!("{stem}.csv");
            let mut w = csv::Writer::from_writer(create(dir, &name)?);
            w.write_record(header)?;
            for r in rows {
                w.write_record(to_record(r))?;
            }
            w.flush()?;
            Ok(name)
        }
        OutputFormat::Json => {
            let name = format!("{stem}.json");
            let mut f = create(dir, &name)?;
            serde_json::to_writer_pretty(&mut f, rows)?;
            f.write_all(b"\n")?;
            Ok(name)
        }
    }
}

pub fn write_summary(dir: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut f = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct TrialRow<'a> {
    method: &'a str,
    trial: usize,
    seed: u64,
    nodes: usize,
    interval: Option<f64>,
    rmse_train: f64,
    rmse_test: f64,
    median_abs_weight: f64,
}

pub fn write_trials(dir: &Path, format: OutputFormat, run: &ComparisonRun) -> Result<String> {
    let rows: Vec<TrialRow> = run
        .reports
        .iter()
        .flat_map(|(method, nodes, reports)| {
            reports.iter().map(move |r| TrialRow {
                method: method.name(),
                trial: r.trial,
                seed: r.seed,
                nodes: *nodes,
                interval: method.interval(),
                rmse_train: r.rmse_train,
                rmse_test: r.rmse_test,
                median_abs_weight: r.median_abs_weight,
            })
        })
        .collect();
    write_table(
        dir,
        "trials",
        format,
        &["method", "trial", "seed", "nodes", "interval", "rmse_train", "rmse_test", "median_abs_weight"],
        &rows,
        |r| {
            vec![
                r.method.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.nodes.to_string(),
                opt_real(r.interval),
                real(r.rmse_train),
                real(r.rmse_test),
                real(r.median_abs_weight),
            ]
        },
    )
}

#[derive(Serialize)]
struct CvRow<'a> {
    method: &'a str,
    #[serde(flatten)]
    cell: CvCell,
}

pub fn write_cv(dir: &Path, format: OutputFormat, tables: &[(String, Vec<CvCell>)]) -> Result<String> {
    let rows: Vec<CvRow> = tables
        .iter()
        .flat_map(|(m, cells)| cells.iter().map(move |c| CvRow { method: m, cell: *c }))
        .collect();
    write_table(dir, "cv", format, &["method", "nodes", "interval", "mean_rmse"], &rows, |r| {
        vec![
            r.method.to_string(),
            r.cell.nodes.to_string(),
            opt_real(r.cell.interval),
            real(r.cell.mean_rmse),
        ]
    })
}

pub fn write_sweep(dir: &Path, format: OutputFormat, points: &[SweepPoint]) -> Result<String> {
    write_table(
        dir,
        "sweep",
        format,
        &["u_ae", "median_abs_v", "mean_rmse_test", "std_rmse_test"],
        points,
        |p| vec![real(p.u_ae), real(p.median_abs_v), real(p.mean_rmse_test), real(p.std_rmse_test)],
    )
}

pub fn write_histogram(dir: &Path, format: OutputFormat, h: &Histogram) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            h.write_csv(create(dir, "histogram.csv")?)?;
            Ok("histogram.csv".into())
        }
        OutputFormat::Json => write_table(dir, "histogram", format, &[], &h.bins, |_| Vec::new()),
    }
}

/// Writes a dataset as CSV with header `x1..xn,y`.
pub fn write_dataset(dir: &Path, name: &str, ds: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, name)?);
    let mut header: Vec<String> = (1..=ds.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for l in 0..ds.len() {
        let mut rec: Vec<String> = ds.x.row(l).iter().map(|&v| real(v)).collect();
        rec.push(real(ds.y[l]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
