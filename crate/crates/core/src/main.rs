use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use randfnn::benchfn::TargetFunctionId;
use randfnn::experiment::config::{
    self, method_from_name, prepare_problem, ExperimentConfig, OutputFormat, ProblemConfig,
};
use randfnn::{Error, Result};

#[derive(Parser)]
#[command(name = "randfnn", version, about = "Randomized learning of feedforward regression networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one network; writes network.json and summary.json.
    Fit(Common),
    /// Repeated trials of every configured method; writes summary.json and trials.
    Benchmark(Common),
    /// Cross-validated grid search per method; writes cv and summary.json.
    GridSearch(Common),
    /// RAEM1 u_AE sweep; writes sweep.
    UaeSweep(Common),
    /// Tuning, trials and pairwise Wilcoxon tests; writes all tables.
    Compare(Common),
    /// Writes the sampled or split problem as train.csv and test.csv.
    Emit(Common),
    /// Pooled hidden-weight histogram of the first method.
    Histogram(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Fit(c)
            | Command::Benchmark(c)
            | Command::GridSearch(c)
            | Command::UaeSweep(c)
            | Command::Compare(c)
            | Command::Emit(c)
            | Command::Histogram(c) => c,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    /// ram, ralpham or raem1..raem5; replaces the configured method list.
    #[arg(long)]
    method: Option<String>,
    /// Interval bound (u, alpha_max or u_AE) applied to every method.
    #[arg(long)]
    interval: Option<f64>,
    /// Synthetic problem: TF1, TF2 or TF3.
    #[arg(long, value_parser = parse_function, conflicts_with = "data")]
    function: Option<TargetFunctionId>,
    /// Argument count of the synthetic problem.
    #[arg(long)]
    dim: Option<usize>,
    /// Train/test size of the synthetic problem.
    #[arg(long)]
    size: Option<usize>,
    /// CSV or KEEL file; the last column is the target.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_function(s: &str) -> std::result::Result<TargetFunctionId, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown function `{s}` (expected TF1, TF2 or TF3)"))
}

fn build_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(m) = c.nodes {
        cfg.nodes = m;
    }
    if let Some(name) = &c.method {
        cfg.methods = vec![method_from_name(name)?];
    }
    if let Some(v) = c.interval {
        cfg.methods = cfg.methods.iter().map(|m| m.with_interval(v)).collect();
    }
    if let Some(path) = &c.data {
        cfg.problem = ProblemConfig::File {
            path: path.clone(),
            name: None,
            header: false,
            delimiter: None,
            target_column: None,
        };
    }
    if c.function.is_some() || c.dim.is_some() || c.size.is_some() {
        let (f0, n0, s0) = match &cfg.problem {
            ProblemConfig::Synthetic { function, n, size } => (*function, *n, *size),
            ProblemConfig::File { .. } if c.function.is_none() => {
                return Err(Error::InvalidConfig(
                    "--dim/--size apply to synthetic problems; add --function".into(),
                ))
            }
            ProblemConfig::File { .. } => (TargetFunctionId::Tf1, 2, None),
        };
        cfg.problem = ProblemConfig::Synthetic {
            function: c.function.unwrap_or(f0),
            n: c.dim.unwrap_or(n0),
            size: c.size.or(s0),
        };
    }
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(f) = c.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn wrote(dir: &Path, name: &str) {
    println!("wrote {}", dir.join(name).display());
}

fn run(command: Command) -> Result<()> {
    let common = command.common().clone();
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let cfg = build_config(&common)?;
    let dir = cfg.output_dir.clone();
    let problem = prepare_problem(&cfg)?;

    match command {
        Command::Fit(_) => {
            let (net, rmse_train, rmse_test) = config::fit_one(&cfg, &problem)?;
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("network.json"), net.to_json()? + "\n")?;
            wrote(&dir, "network.json");
            let summary = serde_json::json!({
                "problem": problem.name,
                "method": cfg.methods[0],
                "nodes": cfg.nodes,
                "seed": cfg.seed,
                "rmse_train": rmse_train,
                "rmse_test": rmse_test,
            });
            std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
            wrote(&dir, "summary.json");
            println!("{} m={} test RMSE {rmse_test:.6e}", cfg.methods[0].name(), cfg.nodes);
        }
        Command::Benchmark(_) | Command::Compare(_) => {
            let mut cfg = cfg;
            if matches!(command, Command::Compare(_)) && cfg.grid.is_none() {
                cfg.grid = Some(Default::default());
            }
            let run = config::compare(&cfg, &problem, false)?;
            config::write_summary(&dir, &run.summary)?;
            wrote(&dir, "summary.json");
            wrote(&dir, &config::write_trials(&dir, cfg.format, &run)?);
            if !run.cv_tables.is_empty() {
                wrote(&dir, &config::write_cv(&dir, cfg.format, &run.cv_tables)?);
            }
            for m in &run.summary.methods {
                println!(
                    "{:<8} m={:<5} interval={:<12} test RMSE {:.4e} ± {:.2e}",
                    m.method,
                    m.nodes,
                    m.config.interval().map_or("-".into(), |v| format!("{v:.4e}")),
                    m.rmse_test.mean,
                    m.rmse_test.std
                );
            }
            for p in &run.summary.pairwise {
                println!("{} vs {}: p = {:.4e}", p.first, p.second, p.result.p_value);
            }
        }
        Command::GridSearch(_) => {
            let grid = cfg.grid.clone().unwrap_or_default();
            let mut tables = Vec::new();
            let mut best = Vec::new();
            for index in 0..cfg.methods.len() {
                let outcome = config::tune_method(&cfg, &grid, index, &problem.train)?;
                let name = cfg.methods[index].name().to_string();
                println!(
                    "{name}: m={} interval={:?} cv RMSE {:.4e}",
                    outcome.best.nodes, outcome.best.interval, outcome.best.mean_rmse
                );
                best.push(serde_json::json!({
                    "method": name,
                    "selected": outcome.best,
                    "config": outcome.tuned(&cfg.methods[index]),
                }));
                tables.push((name, outcome.table));
            }
            wrote(&dir, &config::write_cv(&dir, cfg.format, &tables)?);
            let summary = serde_json::json!({
                "problem": problem.name,
                "seed": cfg.seed,
                "grid": grid,
                "best": best,
            });
            std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
            wrote(&dir, "summary.json");
        }
        Command::UaeSweep(_) => {
            let points = config::sweep(&cfg, &problem)?;
            wrote(&dir, &config::write_sweep(&dir, cfg.format, &points)?);
            if let Some(k) = randfnn::experiment::sweep_minimizer(&points) {
                println!(
                    "minimum RMSE {:.4e} at u_AE = {:.4e} (median |v| {:.3})",
                    points[k].mean_rmse_test, points[k].u_ae, points[k].median_abs_v
                );
            }
        }
        Command::Emit(_) => {
            config::write_dataset(&dir, "train.csv", &problem.train)?;
            config::write_dataset(&dir, "test.csv", &problem.test)?;
            wrote(&dir, "train.csv");
            wrote(&dir, "test.csv");
        }
        Command::Histogram(_) => {
            let h = config::histogram(&cfg, &problem)?;
            wrote(&dir, &config::write_histogram(&dir, cfg.format, &h)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
