use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::CsvConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{ModelKind, ModelSpec};
use crate::train::TrainConfig;

/// Full description of one run, stored as TOML:
///
/// ```toml
/// [data]
/// path = "weather.csv"
/// max_rows = 10000
///
/// [model]
/// kind = "qultsf"
/// lookback = 336
/// horizon = 96
///
/// [train]
/// seed = 1
/// ```
///
/// Unset training fields fall back to per-model defaults when resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_column: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_channels: Option<usize>,
    #[serde(default)]
    pub skip_invalid_rows: bool,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

fn default_delimiter() -> char {
    ','
}
fn default_train_fraction() -> f64 {
    0.7
}
fn default_val_fraction() -> f64 {
    0.1
}
fn default_test_fraction() -> f64 {
    0.2
}

impl DataSection {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: default_delimiter(),
            timestamp_column: None,
            max_rows: None,
            expected_channels: None,
            skip_invalid_rows: false,
            train_fraction: default_train_fraction(),
            val_fraction: default_val_fraction(),
            test_fraction: default_test_fraction(),
        }
    }

    pub fn csv(&self) -> CsvConfig {
        CsvConfig {
            delimiter: self.delimiter,
            timestamp_column: self.timestamp_column,
            max_rows: self.max_rows,
            expected_channels: self.expected_channels,
            skip_invalid_rows: self.skip_invalid_rows,
        }
    }

    pub fn fractions(&self) -> (f64, f64, f64) {
        (self.train_fraction, self.val_fraction, self.test_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// `qultsf`, `linear`, `nlinear` or `dlinear`.
    pub kind: String,
    pub lookback: usize,
    pub horizon: usize,
    pub qubits: usize,
    pub layers: usize,
    /// DLinear moving-average kernel.
    pub kernel: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: "qultsf".into(),
            lookback: 336,
            horizon: 96,
            qubits: 10,
            layers: 3,
            kernel: 25,
        }
    }
}

impl ModelSection {
    pub fn spec(&self) -> Result<ModelSpec> {
        let spec = ModelSpec {
            kind: self.kind.parse()?,
            lookback: self.lookback,
            horizon: self.horizon,
            qubits: self.qubits,
            layers: self.layers,
            kernel: self.kernel,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Training overrides; `None` means "use the model's default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    /// Seeds model initialization and batch shuffling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shuffle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_chunk: Option<usize>,
}

impl TrainSection {
    /// Model-specific defaults: QuLTSF uses lr 1e-3 and 100 epochs, the linear
    /// baselines lr 5e-3 and 20 epochs.
    pub fn defaults_for(kind: ModelKind) -> TrainConfig {
        match kind {
            ModelKind::Qultsf => TrainConfig::default(),
            _ => TrainConfig {
                learning_rate: 5e-3,
                max_epochs: 20,
                ..TrainConfig::default()
            },
        }
    }

    pub fn resolve(&self, kind: ModelKind) -> Result<TrainConfig> {
        let d = Self::defaults_for(kind);
        let cfg = TrainConfig {
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            max_epochs: self.max_epochs.unwrap_or(d.max_epochs),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            lr_decay: self.lr_decay.unwrap_or(d.lr_decay),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            patience: self.patience.unwrap_or(d.patience),
            seed: self.seed.unwrap_or(d.seed),
            shuffle: self.shuffle.unwrap_or(d.shuffle),
            execution: self.execution.unwrap_or(d.execution),
            grad_chunk: self.grad_chunk.unwrap_or(d.grad_chunk),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs") }
    }
}

impl ExperimentConfig {
    pub fn new(data_path: impl Into<PathBuf>, model: ModelSection) -> Self {
        Self {
            data: DataSection::new(data_path),
            model,
            train: TrainSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses TOML and applies `section.key=value` overrides before
    /// validation. Override values are read as TOML literals, falling back to
    /// plain strings.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("<file>", e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.model.spec()?;
        self.train.resolve(spec.kind)?;
        crate::data::make_splits(100, self.data.fractions())?;
        if !self.data.delimiter.is_ascii() {
            return Err(Error::config("data.delimiter", "must be a single ASCII character"));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        self.model.spec()
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        self.train.resolve(self.spec()?.kind)
    }

    pub fn seed(&self) -> u64 {
        self.train.seed.unwrap_or(0)
    }
}

fn apply_override(table: &mut toml::Table, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::config(ov, "override must look like section.key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, sections) = parts.split_last().ok_or_else(|| Error::config(key, "empty override key"))?;
    let mut cur = table;
    for s in sections {
        cur = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{s}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
