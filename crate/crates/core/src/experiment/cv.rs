use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_single, GeneratorConfig};
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::linalg::SolverConfig;
use crate::paramgen::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchConfig {
    pub node_counts: Vec<usize>,
    /// Values for the method's interval bound; ignored by methods without one.
    pub interval_grid: Vec<f64>,
    pub folds: usize,
    pub trials_per_cell: usize,
    pub seed: u64,
}

impl GridSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_counts.is_empty() || self.node_counts.contains(&0) {
            return Err(Error::InvalidConfig("node-count grid must be nonempty and positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::InvalidConfig("trials_per_cell must be positive".into()));
        }
        if self.interval_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("interval grid must be finite".into()));
        }
        Ok(())
    }
}

/// Mean validation RMSE of one grid cell over folds × trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub nodes: usize,
    pub interval: Option<f64>,
    pub mean_rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best: CvCell,
    pub table: Vec<CvCell>,
}

impl CvOutcome {
    /// The method template with the selected interval filled in.
    pub fn tuned(&self, template: &GeneratorConfig) -> GeneratorConfig {
        match self.best.interval {
            Some(v) => template.with_interval(v),
            None => *template,
        }
    }
}

/// `[start, end)` of fold `k` after the shuffle.
pub fn fold_bounds(n: usize, folds: usize, k: usize) -> (usize, usize) {
    (k * n / folds, (k + 1) * n / folds)
}

fn cell_order(a: &CvCell, b: &CvCell) -> Ordering {
    a.mean_rmse
        .total_cmp(&b.mean_rmse)
        .then(a.nodes.cmp(&b.nodes))
        .then_with(|| match (a.interval, b.interval) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => Ordering::Equal,
        })
}

/// Lowest mean RMSE; ties go to fewer nodes, then the smaller interval.
pub fn select_best(table: &[CvCell]) -> Option<CvCell> {
    table.iter().copied().min_by(cell_order)
}

const SHUFFLE_STREAM: u64 = 0;
const UNIT_STREAM: u64 = 1;

/// k-fold grid search over node counts and interval bounds.
///
/// Rows are shuffled once and cut into contiguous folds. Unit
/// `(cell, fold, trial)` draws from `seed / 1 / cell / fold / trial`, so the
/// table does not depend on how units are scheduled.
pub fn cross_validate(
    grid: &GridSearchConfig,
    method: &GeneratorConfig,
    train: &Dataset,
    solver: &SolverConfig,
) -> Result<CvOutcome> {
    grid.validate()?;
    let n = train.len();
    if n < grid.folds {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot be split into {} folds",
            n, grid.folds
        )));
    }
    let intervals: Vec<Option<f64>> = if method.interval().is_some() {
        if grid.interval_grid.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{} needs a nonempty interval grid",
                method.name()
            )));
        }
        grid.interval_grid.iter().map(|&v| Some(v)).collect()
    } else {
        vec![None]
    };
    let cells: Vec<(usize, Option<f64>)> = grid
        .node_counts
        .iter()
        .flat_map(|&m| intervals.iter().map(move |&v| (m, v)))
        .collect();
    for &(_, v) in &cells {
        if let Some(v) = v {
            method.with_interval(v).validate()?;
        }
    }

    let root = RngStream::new(grid.seed);
    let mut order: Vec<usize> = (0..n).collect();
    root.child(SHUFFLE_STREAM).shuffle(&mut order);
    let folds: Vec<(Dataset, Dataset)> = (0..grid.folds)
        .map(|k| {
            let (lo, hi) = fold_bounds(n, grid.folds, k);
            let fit: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
            Ok((train.select(&fit)?, train.select(&order[lo..hi])?))
        })
        .collect::<Result<_>>()?;

    let per_cell = grid.folds * grid.trials_per_cell;
    let units = root.child(UNIT_STREAM);
    let scores: Vec<f64> = (0..cells.len() * per_cell)
        .into_par_iter()
        .map(|u| {
            let (c, rest) = (u / per_cell, u % per_cell);
            let (k, t) = (rest / grid.trials_per_cell, rest % grid.trials_per_cell);
            let (m, v) = cells[c];
            let cell_method = v.map_or(*method, |v| method.with_interval(v));
            let stream = units.child(c as u64).child(k as u64).child(t as u64);
            let (fit, val) = &folds[k];
            let (_, _, rmse) = run_single(&cell_method, fit, val, m, &stream, solver)?;
            Ok(rmse)
        })
        .collect::<Result<_>>()?;

    let table: Vec<CvCell> = cells
        .iter()
        .enumerate()
        .map(|(c, &(nodes, interval))| CvCell {
            nodes,
            interval,
            mean_rmse: scores[c * per_cell..(c + 1) * per_cell].iter().sum::<f64>() / per_cell as f64,
        })
        .collect();
    let best = select_best(&table).expect("grid is nonempty");
    Ok(CvOutcome { best, table })
}
