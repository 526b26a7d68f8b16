use std::io::Write;

use serde::{Deserialize, Serialize};

use super::TrialReport;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub total: u64,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed.
    /// A sample with a single distinct value gets one degenerate bin.
    pub fn of(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidRequest("histogram needs at least one bin".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidRequest("histogram of an empty sample".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInput("histogram of non-finite values".into()));
        }
        let total = values.len() as u64;
        if lo == hi {
            return Ok(Self {
                bins: vec![HistogramBin {
                    left: lo,
                    right: hi,
                    count: total,
                }],
                total,
            });
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(k, count)| HistogramBin {
                left: lo + width * k as f64,
                right: if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 },
                count,
            })
            .collect();
        Ok(Self { bins, total })
    }

    /// CSV with columns `bin_left,bin_right,count`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "count"])?;
        for b in &self.bins {
            w.write_record([format!("{:.16e}", b.left), format!("{:.16e}", b.right), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pooled histogram of the hidden weights of every report.
pub fn weight_histogram(reports: &[TrialReport], bins: usize) -> Result<Histogram> {
    let mut pooled = Vec::new();
    for r in reports {
        match &r.weights {
            Some(w) => pooled.extend_from_slice(w),
            None => {
                return Err(Error::InvalidRequest(format!(
                    "trial {} has no weight snapshot",
                    r.trial
                )))
            }
        }
    }
    if pooled.is_empty() {
        return Err(Error::InvalidRequest("no weight snapshots to pool".into()));
    }
    Histogram::of(&pooled, bins)
}
