use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::split::SplitSpec;
use super::table::TimeSeriesTable;
use crate::error::{ensure_len, Error, Result};

/// Per-channel z-scoring fitted on the training range only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; constant channels get 1.
    pub stds: Vec<f64>,
    /// Channels whose training range was constant.
    pub constant_channels: Vec<usize>,
}

impl Standardizer {
    pub fn fit(table: &TimeSeriesTable, range: Range<usize>) -> Result<Self> {
        if range.is_empty() || range.end > table.num_timestamps() {
            return Err(Error::InvalidInput(format!(
                "standardizer needs a non-empty training range within the table, got {range:?}"
            )));
        }
        let n = range.len() as f64;
        let mut means = Vec::with_capacity(table.num_channels());
        let mut stds = Vec::with_capacity(table.num_channels());
        let mut constant_channels = Vec::new();
        for (m, col) in table.columns().iter().enumerate() {
            let xs = &col[range.clone()];
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            if std > 0.0 && std.is_finite() {
                stds.push(std);
            } else {
                log::warn!("channel `{}` is constant on the training range; using std = 1", table.channel_names()[m]);
                constant_channels.push(m);
                stds.push(1.0);
            }
            means.push(mean);
        }
        Ok(Self {
            means,
            stds,
            constant_channels,
        })
    }

    pub fn transform(&self, table: &TimeSeriesTable) -> Result<TimeSeriesTable> {
        ensure_len("standardizer channels", self.means.len(), table.num_channels())?;
        let mut out = table.clone();
        for (m, col) in out.columns_mut().iter_mut().enumerate() {
            let (mu, sd) = (self.means[m], self.stds[m]);
            col.iter_mut().for_each(|v| *v = (*v - mu) / sd);
        }
        Ok(out)
    }

    pub fn inverse(&self, table: &TimeSeriesTable) -> Result<TimeSeriesTable> {
        ensure_len("standardizer channels", self.means.len(), table.num_channels())?;
        let mut out = table.clone();
        for (m, col) in out.columns_mut().iter_mut().enumerate() {
            let (mu, sd) = (self.means[m], self.stds[m]);
            col.iter_mut().for_each(|v| *v = *v * sd + mu);
        }
        Ok(out)
    }

    /// Maps standardized values of channel `m` back to raw units.
    pub fn inverse_values(&self, m: usize, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| v * self.stds[m] + self.means[m]).collect()
    }
}

/// Fits on `split.train` and transforms every timestamp.
pub fn standardize(table: &TimeSeriesTable, split: &SplitSpec) -> Result<(TimeSeriesTable, Standardizer)> {
    let s = Standardizer::fit(table, split.train.clone())?;
    Ok((s.transform(table)?, s))
}
