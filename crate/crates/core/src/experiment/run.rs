use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{DataSection, ExperimentConfig};
use crate::data::{load_csv, make_splits, standardize, SplitSpec, Standardizer, TimeSeriesTable, WindowDataset};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricsReport};
use crate::models::{Model, ModelKind, ModelSpec};
use crate::nn::Parameterized;
use crate::train::{train, TrainConfig, TrainingLog};

/// A dataset after ingestion, splitting and standardization.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub source: PathBuf,
    /// Standardized values.
    pub table: TimeSeriesTable,
    pub split: SplitSpec,
    pub standardizer: Standardizer,
}

/// Loads, truncates, splits and standardizes the dataset named in `data`.
pub fn prepare_data(data: &DataSection) -> Result<PreparedData> {
    let raw = load_csv(&data.path, &data.csv())?;
    prepare_table(data.path.clone(), &raw, data.fractions())
}

pub(crate) fn prepare_table(source: PathBuf, raw: &TimeSeriesTable, fractions: (f64, f64, f64)) -> Result<PreparedData> {
    let split = make_splits(raw.num_timestamps(), fractions)?;
    let (table, standardizer) = standardize(raw, &split)?;
    log::info!(
        "{}: {} rows x {} channels; train {:?}, val {:?}, test {:?}",
        source.display(),
        table.num_timestamps(),
        table.num_channels(),
        split.train,
        split.val,
        split.test
    );
    Ok(PreparedData {
        source,
        table,
        split,
        standardizer,
    })
}

/// The summary line of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: ModelKind,
    pub lookback: usize,
    pub horizon: usize,
    pub seed: u64,
    pub mse: f64,
    pub mae: f64,
    pub val_mse: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub train_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub row: ResultRow,
    pub test: MetricsReport,
    pub log: TrainingLog,
    pub model: Model,
    /// Directory holding the run's artifacts.
    pub dir: PathBuf,
}

/// Loads the data and runs one experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let data = prepare_data(&config.data)?;
    run_prepared(config, &data)
}

/// Trains and evaluates one model on already prepared data, writing
/// `manifest.toml`, `train_log.csv`, `metrics.csv`, `metrics.txt` and
/// `checkpoint.txt` into a directory named after the cell.
pub fn run_prepared(config: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentResult> {
    let spec = config.spec()?;
    let train_cfg = config.train_config()?;
    let seed = train_cfg.seed;
    let (l, t) = (spec.lookback, spec.horizon);

    let train_set = WindowDataset::new(&data.table, data.split.train.clone(), l, t)?;
    let val_set = WindowDataset::new(&data.table, data.split.val.clone(), l, t)?;
    let test_set = WindowDataset::new(&data.table, data.split.test.clone(), l, t)?;
    for (name, n) in [("train", train_set.per_channel()), ("test", test_set.per_channel())] {
        if n == 0 {
            return Err(Error::InvalidInput(format!(
                "{name} split has no windows for lookback {l} and horizon {t}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let model = Model::init(&spec, &mut rng)?;
    log::info!("training {} (L={l}, T={t}, seed={seed}, {} parameters)", spec.kind, spec.param_count());

    let started = Instant::now();
    let (mut model, log) = train(model, &train_set, Some(&val_set), &train_cfg)?;
    let train_seconds = started.elapsed().as_secs_f64();
    let test = evaluate(&model, &test_set, train_cfg.execution)?;
    log::info!("{} L={l} T={t} seed={seed}: test mse {:.6} mae {:.6}", spec.kind, test.mse, test.mae);

    let row = ResultRow {
        model: spec.kind,
        lookback: l,
        horizon: t,
        seed,
        mse: test.mse,
        mae: test.mae,
        val_mse: log.best_val_mse,
        best_epoch: log.best_epoch,
        epochs_run: log.epochs.len(),
        train_seconds,
    };

    let dir = config.output.dir.join(cell_dir_name(spec.kind, l, t, seed));
    fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let manifest = Manifest::new(config, &spec, &train_cfg, data, &mut model, &row, &test, &log, [&train_set, &val_set, &test_set]);
    write(&dir.join("manifest.toml"), &manifest.to_toml()?)?;
    write(&dir.join("train_log.csv"), &log.to_csv())?;
    write(&dir.join("metrics.csv"), &rows_to_csv(std::slice::from_ref(&row))?)?;
    let mut kv = format!("model={}\nlookback={l}\nhorizon={t}\nseed={seed}\n", spec.kind);
    kv.push_str(&test.to_key_value());
    write(&dir.join("metrics.txt"), &kv)?;
    model.to_checkpoint().save(&dir.join("checkpoint.txt"))?;

    Ok(ExperimentResult {
        row,
        test,
        log,
        model,
        dir,
    })
}

pub(crate) fn cell_dir_name(kind: ModelKind, lookback: usize, horizon: usize, seed: u64) -> String {
    format!("{kind}_L{lookback}_T{horizon}_seed{seed}")
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub(crate) fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("formatting results", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    parallel_feature: bool,
    config: &'a ExperimentConfig,
    resolved_train: &'a TrainConfig,
    model: ModelManifest,
    dataset: DatasetManifest,
    split: SplitManifest,
    standardizer: &'a Standardizer,
    results: ResultsManifest,
}

#[derive(Serialize)]
struct ModelManifest {
    kind: ModelKind,
    lookback: usize,
    horizon: usize,
    qubits: usize,
    layers: usize,
    kernel: usize,
    param_count: usize,
    circuit_param_count: usize,
}

#[derive(Serialize)]
struct DatasetManifest {
    path: String,
    rows: usize,
    channels: usize,
    channel_names: Vec<String>,
    rejected_rows: usize,
}

#[derive(Serialize)]
struct SplitManifest {
    fractions: [f64; 3],
    train: [usize; 2],
    val: [usize; 2],
    test: [usize; 2],
    /// Windows per channel in each split.
    windows: [usize; 3],
}

#[derive(Serialize)]
struct ResultsManifest {
    test_mse: f64,
    test_mae: f64,
    best_val_mse: f64,
    best_epoch: usize,
    epochs_run: usize,
    stopped_early: bool,
    final_train_loss: f64,
    train_seconds: f64,
}

fn pair(r: &Range<usize>) -> [usize; 2] {
    [r.start, r.end]
}

impl<'a> Manifest<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        config: &'a ExperimentConfig,
        spec: &ModelSpec,
        train_cfg: &'a TrainConfig,
        data: &'a PreparedData,
        model: &mut Model,
        row: &ResultRow,
        test: &MetricsReport,
        log: &TrainingLog,
        sets: [&WindowDataset<'_>; 3],
    ) -> Self {
        let s = &data.split;
        Manifest {
            crate_version: env!("CARGO_PKG_VERSION"),
            parallel_feature: cfg!(feature = "parallel"),
            config,
            resolved_train: train_cfg,
            model: ModelManifest {
                kind: spec.kind,
                lookback: spec.lookback,
                horizon: spec.horizon,
                qubits: spec.qubits,
                layers: spec.layers,
                kernel: spec.kernel,
                param_count: model.num_params(),
                circuit_param_count: spec.circuit_param_count(),
            },
            dataset: DatasetManifest {
                path: data.source.display().to_string(),
                rows: data.table.num_timestamps(),
                channels: data.table.num_channels(),
                channel_names: data.table.channel_names().to_vec(),
                rejected_rows: data.table.rejected_rows(),
            },
            split: SplitManifest {
                fractions: [s.train_fraction, s.val_fraction, s.test_fraction],
                train: pair(&s.train),
                val: pair(&s.val),
                test: pair(&s.test),
                windows: sets.map(|d| d.per_channel()),
            },
            standardizer: &data.standardizer,
            results: ResultsManifest {
                test_mse: test.mse,
                test_mae: test.mae,
                best_val_mse: log.best_val_mse,
                best_epoch: log.best_epoch,
                epochs_run: log.epochs.len(),
                stopped_early: log.stopped_early,
                final_train_loss: log.final_train_loss,
                train_seconds: row.train_seconds,
            },
        }
    }

    fn to_toml(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "# resolved settings and results of one run");
        out.push_str(&toml::to_string_pretty(self).map_err(|e| Error::config("manifest", e.to_string()))?);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth;
    use crate::experiment::ModelSection;

    #[test]
    fn writes_all_artifacts_and_reloads_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        synth::weather_like(400, 2, 3).unwrap().write_csv(&csv).unwrap();
        let mut cfg = ExperimentConfig::new(
            &csv,
            ModelSection {
                kind: "qultsf".into(),
                lookback: 16,
                horizon: 4,
                qubits: 3,
                layers: 1,
                kernel: 5,
            },
        );
        cfg.output.dir = dir.path().join("out");
        cfg.train.max_epochs = Some(2);
        cfg.train.seed = Some(4);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.dir, cfg.output.dir.join("qultsf_L16_T4_seed4"));
        for f in ["manifest.toml", "train_log.csv", "metrics.csv", "metrics.txt", "checkpoint.txt"] {
            assert!(res.dir.join(f).is_file(), "{f}");
        }
        let manifest: toml::Table = fs::read_to_string(res.dir.join("manifest.toml")).unwrap().parse().unwrap();
        assert_eq!(manifest["model"]["circuit_param_count"].as_integer(), Some(9));
        assert_eq!(manifest["split"]["train"].as_array().unwrap()[1].as_integer(), Some(280));
        let ckpt = crate::nn::Checkpoint::load(&res.dir.join("checkpoint.txt")).unwrap();
        assert_eq!(Model::from_checkpoint(&ckpt).unwrap(), res.model);

        let again = run_experiment(&cfg).unwrap();
        assert_eq!(again.row.mse.to_bits(), res.row.mse.to_bits());
    }
}
