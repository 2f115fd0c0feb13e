use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{prepare_data, rows_to_csv, run_prepared, write, ResultRow};
use crate::error::{Error, Result};
use crate::models::ModelKind;

/// The axes of a sweep. Every combination is one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizons: Vec<usize>,
    pub lookbacks: Vec<usize>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let lens = [
            ("grid.horizons", self.horizons.len()),
            ("grid.lookbacks", self.lookbacks.len()),
            ("grid.models", self.models.len()),
            ("grid.seeds", self.seeds.len()),
        ];
        for (field, n) in lens {
            if n == 0 {
                return Err(Error::config(field, "must list at least one value"));
            }
        }
        Ok(())
    }

    /// Cells in lookback, horizon, model, seed order.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for &lookback in &self.lookbacks {
            for &horizon in &self.horizons {
                for &model in &self.models {
                    for &seed in &self.seeds {
                        out.push(GridCell {
                            model,
                            lookback,
                            horizon,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub model: ModelKind,
    pub lookback: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl GridCell {
    fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        cfg.model.kind = self.model.name().to_string();
        cfg.model.lookback = self.lookback;
        cfg.model.horizon = self.horizon;
        cfg.train.seed = Some(self.seed);
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub rows: Vec<ResultRow>,
    /// Cells that failed, with the error message.
    pub failures: Vec<(GridCell, String)>,
    pub dir: PathBuf,
    /// The aligned summary table also written to `summary.txt`.
    pub table: String,
}

impl GridReport {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every cell of `grid` on the dataset of `base`, continuing past
/// failed cells. Writes per-cell artifacts plus `results.csv`,
/// `summary.csv`, `summary.txt`, `failures.txt` and one
/// `plots/T<horizon>_<model>.csv` series per horizon and model.
pub fn run_grid(base: &ExperimentConfig, grid: &GridSpec) -> Result<GridReport> {
    grid.validate()?;
    let data = prepare_data(&base.data)?;
    let dir = base.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;

    let cells = grid.cells();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        log::info!("cell {}/{}: {:?}", i + 1, cells.len(), cell);
        let cfg = cell.apply(base);
        match cfg.validate().and_then(|_| run_prepared(&cfg, &data)) {
            Ok(res) => rows.push(res.row),
            Err(e) => {
                log::error!("cell {:?} failed: {e}", cell);
                failures.push((*cell, e.to_string()));
            }
        }
    }

    write(&dir.join("results.csv"), &rows_to_csv(&rows)?)?;
    let summary = summarize(&rows);
    write(&dir.join("summary.csv"), &summary_csv(&summary))?;
    let table = format_table(grid, &summary);
    write(&dir.join("summary.txt"), &table)?;
    write_plots(&dir, &summary)?;
    let mut fail_text = String::new();
    for (cell, msg) in &failures {
        let _ = writeln!(fail_text, "{} L={} T={} seed={}: {msg}", cell.model, cell.lookback, cell.horizon, cell.seed);
    }
    write(&dir.join("failures.txt"), &fail_text)?;

    Ok(GridReport {
        rows,
        failures,
        dir,
        table,
    })
}

/// Mean and spread over seeds for one (model, lookback, horizon).
#[derive(Debug, Clone, PartialEq)]
struct Summary {
    seeds: usize,
    mse_mean: f64,
    mse_std: f64,
    mae_mean: f64,
    mae_std: f64,
}

type SummaryKey = (ModelKind, usize, usize);

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(rows: &[ResultRow]) -> BTreeMap<SummaryKey, Summary> {
    let mut groups: BTreeMap<SummaryKey, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.model, r.lookback, r.horizon)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(k, rs)| {
            let (mse_mean, mse_std) = mean_std(&rs.iter().map(|r| r.mse).collect::<Vec<_>>());
            let (mae_mean, mae_std) = mean_std(&rs.iter().map(|r| r.mae).collect::<Vec<_>>());
            (
                k,
                Summary {
                    seeds: rs.len(),
                    mse_mean,
                    mse_std,
                    mae_mean,
                    mae_std,
                },
            )
        })
        .collect()
}

fn summary_csv(summary: &BTreeMap<SummaryKey, Summary>) -> String {
    let mut out = String::from("model,lookback,horizon,seeds,mse_mean,mse_std,mae_mean,mae_std\n");
    for ((model, l, t), s) in summary {
        let _ = writeln!(
            out,
            "{model},{l},{t},{},{:?},{:?},{:?},{:?}",
            s.seeds, s.mse_mean, s.mse_std, s.mae_mean, s.mae_std
        );
    }
    out
}

fn format_cell(mean: f64, std: f64, seeds: usize) -> String {
    if seeds > 1 {
        format!("{mean:.4}±{std:.4}")
    } else {
        format!("{mean:.4}")
    }
}

/// One block per lookback; rows are horizons, columns MSE and MAE per model.
fn format_table(grid: &GridSpec, summary: &BTreeMap<SummaryKey, Summary>) -> String {
    let multi_seed = grid.seeds.len() > 1;
    let mut out = String::new();
    for &l in &grid.lookbacks {
        let mut header = vec!["T".to_string()];
        for m in &grid.models {
            header.push(format!("{m} MSE"));
            header.push(format!("{m} MAE"));
        }
        let mut lines = vec![header];
        for &t in &grid.horizons {
            let mut line = vec![t.to_string()];
            for &m in &grid.models {
                match summary.get(&(m, l, t)) {
                    Some(s) => {
                        line.push(format_cell(s.mse_mean, s.mse_std, s.seeds));
                        line.push(format_cell(s.mae_mean, s.mae_std, s.seeds));
                    }
                    None => {
                        line.push("failed".into());
                        line.push("failed".into());
                    }
                }
            }
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let _ = write!(out, "Test metrics, lookback {l}");
        if multi_seed {
            let _ = write!(out, " (mean±std over {} seeds)", grid.seeds.len());
        }
        out.push('\n');
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}", w = *w))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

fn write_plots(dir: &std::path::Path, summary: &BTreeMap<SummaryKey, Summary>) -> Result<()> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::io(format!("creating {}", plots.display()), e))?;
    let mut series: BTreeMap<(usize, ModelKind), Vec<(usize, f64)>> = BTreeMap::new();
    for ((m, l, t), s) in summary {
        series.entry((*t, *m)).or_default().push((*l, s.mse_mean));
    }
    for ((t, m), mut pts) in series {
        pts.sort_by_key(|p| p.0);
        let mut text = String::from("lookback,mse\n");
        for (l, mse) in pts {
            let _ = writeln!(text, "{l},{mse:?}");
        }
        write(&plots.join(format!("T{t}_{m}.csv")), &text)?;
    }
    Ok(())
}
