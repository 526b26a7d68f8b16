//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Criterion 9 reads a KEEL `stock` file from `RANDFNN_STOCK` when that
//! variable is set; otherwise it runs the pipeline on a generated stand-in
//! file of the same shape and says so.

mod common;

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randfnn::benchfn::{sample_problem, SampledProblem, TargetFunction, TargetFunctionId};
use randfnn::dataio::{load_csv, CsvOptions};
use randfnn::experiment::config::{ExperimentSummary, GridConfig};
use randfnn::experiment::{
    cross_validate, log_grid, run_trials, sweep_minimizer, uae_sweep, wilcoxon_signed_rank,
    GeneratorConfig, GridSearchConfig, TrialOptions, TrialReport, WilcoxonMethod,
};
use randfnn::linalg::{Matrix, SolverConfig};
use randfnn::model::sigmoid;
use randfnn::paramgen::{
    generate_ralpham, generate_ram, input_hypercube, AnchorPolicy, Hypercube, RAlphaMConfig,
    RaMConfig, RngStream,
};
use randfnn::rae::{raem_hidden_layer, RaemVariant};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn demo_problem(seed: u64) -> SampledProblem {
    let tf = TargetFunction::new(TargetFunctionId::Tf1, 1).unwrap();
    sample_problem(&tf, Some(5000), &RngStream::new(seed)).unwrap()
}

fn test_rmse(reports: &[TrialReport]) -> Vec<f64> {
    reports.iter().map(|r| r.rmse_test).collect()
}

fn trials(method: &GeneratorConfig, p: &SampledProblem, m: usize, n: usize, seed: u64) -> Vec<TrialReport> {
    run_trials(method, &p.train, &p.test, m, n, &RngStream::new(seed), &TrialOptions::default()).unwrap()
}

/// Moore-Penrose conditions on 1,000 seeded matrices up to 100×100.
fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut deficient = 0;
    for k in 0..1000 {
        let rows = rng.gen_range(1..=100);
        let cols = rng.gen_range(1..=100);
        let a = if k % 3 == 0 && rows.min(cols) > 1 {
            deficient += 1;
            let r = rng.gen_range(1..rows.min(cols));
            common::low_rank(&mut rng, rows, cols, r)
        } else {
            common::random_matrix(&mut rng, rows, cols)
        };
        let x = common::pinv(&a);
        for r in common::penrose_residuals(&a, &x) {
            worst = worst.max(r);
        }
    }
    check(
        worst <= 1e-8,
        format!("worst relative residual {worst:.2e} (limit 1e-8), {deficient} rank-deficient"),
    )
}

/// Node output at its anchor is 0.5 for 10,000 nodes per method.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = Matrix::from_fn(1000, 3, |_, _| rng.gen_range(0.0..1.0));
    let cube = input_hypercube(&x).unwrap();
    let solver = SolverConfig::default();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    let mut record = |hidden: &randfnn::HiddenLayer, anchors: &Matrix| {
        for i in 0..hidden.node_count() {
            let v = sigmoid(hidden.pre_activation(i, anchors.row(i)));
            worst = worst.max((v - 0.5).abs());
            count += 1;
        }
    };
    let ram = RaMConfig { u: 50.0, anchor: AnchorPolicy::RandomTrainingPoint };
    let g = generate_ram(&ram, &x, &cube, 10_000, &RngStream::new(20)).unwrap();
    record(&g.hidden, &g.anchors);
    let ralpham = RAlphaMConfig { alpha_min_deg: 0.0, alpha_max_deg: 90.0, anchor: AnchorPolicy::UniformInH };
    let g = generate_ralpham(&ralpham, &x, &cube, 10_000, &RngStream::new(21)).unwrap();
    record(&g.hidden, &g.anchors);
    let anchor = AnchorPolicy::RandomTrainingPoint;
    for variant in [
        RaemVariant::Raem1 { u_ae: 0.05, anchor },
        RaemVariant::Raem2 { anchor },
        RaemVariant::Raem3 { anchor },
    ] {
        for part in 0..20u64 {
            let g = raem_hidden_layer(&variant, &x, &cube, 500, &RngStream::new(22).child(part), &solver).unwrap();
            record(&g.hidden, g.anchors.as_ref().unwrap());
        }
    }
    check(
        worst <= 1e-12 && count == 50_000,
        format!("{count} nodes, max |output - 0.5| = {worst:.1e} (limit 1e-12)"),
    )
}

/// RAEM5 inflections sit at x = -1; RAEM5 is more than 5× worse than tuned RαM.
fn criterion_3() -> Outcome {
    let p = demo_problem(3);
    let solver = SolverConfig::default();
    let cube = p.train.hypercube();
    let mut exact = true;
    for s in 0..20u64 {
        let g = raem_hidden_layer(&RaemVariant::Raem5, &p.train.x, &cube, 200, &RngStream::new(30).child(s), &solver).unwrap();
        let a = g.hidden.weights();
        exact &= (0..200).all(|i| -g.hidden.biases()[i] / a[(0, i)] == -1.0);
    }
    let grid = GridSearchConfig {
        node_counts: vec![200],
        interval_grid: (1..=9).map(|k| 10.0 * k as f64).collect(),
        folds: 5,
        trials_per_cell: 1,
        seed: 31,
    };
    let template = GeneratorConfig::ralpham(0.0, 90.0);
    let cv = cross_validate(&grid, &template, &p.train, &solver).unwrap();
    let tuned = cv.tuned(&template);
    let ralpham = common::mean(&test_rmse(&trials(&tuned, &p, 200, 20, 32)));
    let raem5 = common::mean(&test_rmse(&trials(&GeneratorConfig::raem(RaemVariant::Raem5), &p, 200, 20, 32)));
    check(
        exact && raem5 > 5.0 * ralpham,
        format!(
            "inflections at -1 exactly: {exact}; RMSE RAEM5 {raem5:.3e} vs RalphaM (alpha_max {:?}) {ralpham:.3e}, ratio {:.1} (need > 5)",
            cv.best.interval,
            raem5 / ralpham
        ),
    )
}

/// m = 25 on the demo function: RαM accuracy and the RAEM1 u_AE sweep.
fn criterion_4() -> Outcome {
    let p = demo_problem(4);
    let ralpham = common::mean(&test_rmse(&trials(&GeneratorConfig::ralpham(0.0, 83.0), &p, 25, 20, 40)));
    let grid = log_grid(1e-5, 1e1, 25).unwrap();
    let points = uae_sweep(
        &p.train,
        &p.test,
        25,
        &grid,
        20,
        AnchorPolicy::RandomTrainingPoint,
        &RngStream::new(41),
        &SolverConfig::default(),
    )
    .unwrap();
    let best = points[sweep_minimizer(&points).unwrap()];
    let ok = ralpham <= 0.02
        && best.u_ae > 0.02
        && best.u_ae < 0.5
        && (3.0..=20.0).contains(&best.median_abs_v);
    check(
        ok,
        format!(
            "RalphaM RMSE {ralpham:.4} (limit 0.02); sweep minimum at u_AE {:.4} (need (0.02, 0.5)) with median|v| {:.2} (need [3, 20]), RMSE {:.4}",
            best.u_ae, best.median_abs_v, best.mean_rmse_test
        ),
    )
}

/// TF1, n = 2, m = 800, 10 trials per method.
fn criterion_5() -> Outcome {
    let tf = TargetFunction::new(TargetFunctionId::Tf1, 2).unwrap();
    let p = sample_problem(&tf, None, &RngStream::new(5)).unwrap();
    let run = |m: GeneratorConfig| test_rmse(&trials(&m, &p, 800, 10, 50));
    let ralpham = run(GeneratorConfig::ralpham(0.0, 90.0));
    let ram = run(GeneratorConfig::ram(20.0));
    let raem1 = run(GeneratorConfig::raem1(0.001));
    let (a, r, e) = (common::mean(&ralpham), common::mean(&ram), common::mean(&raem1));
    let p_ram = wilcoxon_signed_rank(&ralpham, &ram).unwrap().p_value;
    let p_raem = wilcoxon_signed_rank(&ralpham, &raem1).unwrap().p_value;
    let ok = a <= 0.003 && r <= 0.006 && e <= 0.006 && a < r && a < e && p_ram < 0.05 && p_raem < 0.05;
    check(
        ok,
        format!(
            "RalphaM {a:.2e} (<= 3e-3), RaM {r:.2e} (<= 6e-3), RAEM1 {e:.2e} (<= 6e-3); RalphaM vs RaM p = {p_ram:.2e}, vs RAEM1 p = {p_raem:.2e} (< 0.05)"
        ),
    )
}

/// Weight-distribution laws over 10^6 samples.
fn criterion_6() -> Outcome {
    let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
    let cube = Hypercube::unit(1);
    let g = generate_ram(&RaMConfig { u: 100.0, anchor: AnchorPolicy::default() }, &x, &cube, 1_000_000, &RngStream::new(60)).unwrap();
    let steep = g
        .hidden
        .weights()
        .as_slice()
        .iter()
        .filter(|a| (*a / 4.0).atan().to_degrees().abs() > 80.0)
        .count() as f64
        / 1e6;
    let cfg = RAlphaMConfig { alpha_min_deg: 0.0, alpha_max_deg: 90.0, anchor: AnchorPolicy::default() };
    let g = generate_ralpham(&cfg, &x, &cube, 1_000_000, &RngStream::new(61)).unwrap();
    let mut abs: Vec<f64> = g.hidden.weights().as_slice().iter().map(|a| a.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let median = 0.5 * (abs[499_999] + abs[500_000]);
    check(
        (steep - 0.773).abs() <= 0.01 && (median - 4.0).abs() <= 0.05,
        format!("steep fraction {steep:.4} (0.773 ± 0.01); RalphaM median |a| {median:.4} (4 ± 0.05)"),
    )
}

/// Exact Wilcoxon p-values equal the sign-enumeration oracle.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut with_ties = 0;
    for k in 0..200 {
        let len = rng.gen_range(6..=12);
        // Every other sample is quantized so that ties and zeros appear.
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            let v: f64 = rng.gen_range(-3.0..3.0);
            if k % 2 == 0 { (v * 2.0).round() / 2.0 } else { v }
        };
        let a: Vec<f64> = (0..len).map(|_| draw(&mut rng)).collect();
        let b: Vec<f64> = (0..len).map(|_| draw(&mut rng)).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
        if (0..len).any(|i| (0..i).any(|j| d[i] == d[j])) {
            with_ties += 1;
        }
        if r.method == WilcoxonMethod::Normal || r.p_value != common::wilcoxon_enumeration_p(&a, &b) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} mismatches in 200 samples ({with_ties} with tied or zero differences)"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_randfnn"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Byte-identical benchmark summaries across runs and thread counts.
fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("bench.json");
    std::fs::write(
        &config,
        r#"{
  "problem": {"kind": "synthetic", "function": "TF1", "n": 2, "size": 1000},
  "methods": [
    {"method": "ralpham", "alpha_max_deg": 90},
    {"method": "ram", "u": 20},
    {"method": "raem", "variant": "raem1", "u_ae": 0.01}
  ],
  "nodes": 60,
  "trials": 8,
  "seed": 2024
}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4", "2"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        run_cli(&[
            "benchmark",
            "--config",
            config.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ])?;
        let summary = std::fs::read(out.join("summary.json")).map_err(|e| e.to_string())?;
        let trials = std::fs::read(out.join("trials.csv")).map_err(|e| e.to_string())?;
        outputs.push((summary, trials));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(same, format!("4 runs at 1/4/4/2 threads, summary.json ({} bytes) identical: {same}", outputs[0].0.len()))
}

/// Writes a KEEL-format file with 950 rows and 9 inputs.
fn write_stock_stand_in(path: &Path) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "@relation stock")?;
    for j in 1..=9 {
        writeln!(f, "@attribute Company{j} real [0.0, 100.0]")?;
    }
    writeln!(f, "@attribute Company10 real [0.0, 100.0]")?;
    writeln!(f, "@inputs Company1, Company2, Company3, Company4, Company5, Company6, Company7, Company8, Company9")?;
    writeln!(f, "@outputs Company10")?;
    writeln!(f, "@data")?;
    for _ in 0..950 {
        let x: Vec<f64> = (0..9).map(|_| rng.gen_range(10.0..90.0)).collect();
        let y = x.iter().enumerate().map(|(j, v)| (v / 15.0 + j as f64).sin()).sum::<f64>() * 5.0 + 50.0;
        let cells: Vec<String> = x.iter().chain(std::iter::once(&y)).map(|v| format!("{v:.3}")).collect();
        writeln!(f, "{}", cells.join(", "))?;
    }
    Ok(())
}

/// Full comparison pipeline on the KEEL `stock` file.
fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (path, source) = match std::env::var_os("RANDFNN_STOCK") {
        Some(p) => (std::path::PathBuf::from(p), "user-supplied file"),
        None => {
            let p = dir.path().join("stock.dat");
            write_stock_stand_in(&p).map_err(|e| e.to_string())?;
            (p, "generated stand-in; set RANDFNN_STOCK for the real file")
        }
    };
    let ds = load_csv(&path, &CsvOptions::default()).map_err(|e| e.to_string())?;
    let shape = (ds.len(), ds.dim());
    let grid = GridConfig {
        node_counts: vec![20, 60],
        u_grid: vec![1.0, 10.0],
        u_ae_grid: vec![1e-3, 1e-1],
        alpha_max_grid: vec![45.0, 90.0],
        folds: 5,
        trials_per_cell: 1,
    };
    let config = serde_json::json!({
        "problem": {"kind": "file", "path": path, "name": "stock"},
        "methods": [
            {"method": "ram", "u": 1.0},
            {"method": "ralpham", "alpha_max_deg": 90},
            {"method": "raem", "variant": "raem1", "u_ae": 0.1}
        ],
        "grid": grid,
        "trials": 10,
        "seed": 9
    });
    let cfg_path = dir.path().join("stock.json");
    std::fs::write(&cfg_path, config.to_string()).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    run_cli(&["compare", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()])?;
    let files = ["summary.json", "trials.csv", "cv.csv"];
    let missing: Vec<&str> = files.iter().copied().filter(|f| !out.join(f).is_file()).collect();
    let summary: ExperimentSummary =
        serde_json::from_slice(&std::fs::read(out.join("summary.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let ds_summary = summary.dataset.as_ref().map(|d| (d.samples, d.arguments));
    check(
        shape == (950, 9) && ds_summary == Some((950, 9)) && missing.is_empty() && summary.pairwise.len() == 3,
        format!(
            "{source}: loaded {}/{} samples/arguments, outputs missing {missing:?}, {} pairwise tests",
            shape.0,
            shape.1,
            summary.pairwise.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pseudoinverse axioms", criterion_1),
        ("inflection anchoring", criterion_2),
        ("RAEM5 inflection pathology", criterion_3),
        ("one-dimensional recovery and u_AE sweep", criterion_4),
        ("TF1 n=2 reproduction", criterion_5),
        ("weight distribution laws", criterion_6),
        ("Wilcoxon exact path", criterion_7),
        ("benchmark determinism", criterion_8),
        ("real-data pipeline", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("[PASS] criterion {} ({name}): {msg} [{secs:.1}s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {} ({name}): {msg} [{secs:.1}s]", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
