use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ingestion options for delimited text files with a header row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvConfig {
    pub delimiter: char,
    /// Whether the first column holds timestamps. `None` detects it from the
    /// first data row.
    pub timestamp_column: Option<bool>,
    /// Keep only the first `max_rows` data rows.
    pub max_rows: Option<usize>,
    /// Fail unless the file has exactly this many value columns.
    pub expected_channels: Option<usize>,
    /// Drop rows with unparseable cells instead of failing; the number of
    /// dropped rows is reported on the table.
    pub skip_invalid_rows: bool,
}

impl Default for CsvConfig {
    fn default() -> Self {
        Self {
            delimiter: ',',
            timestamp_column: None,
            max_rows: None,
            expected_channels: None,
            skip_invalid_rows: false,
        }
    }
}

/// Multivariate series stored column-major: one contiguous vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    channel_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    timestamps: Option<Vec<String>>,
    rejected_rows: usize,
}

impl TimeSeriesTable {
    pub fn from_columns(channel_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("table needs at least one channel".into()));
        }
        if channel_names.len() != columns.len() {
            return Err(Error::dim("channel names", columns.len(), channel_names.len()));
        }
        let n = columns[0].len();
        if let Some(bad) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::InvalidInput(format!("channel {bad} has {} rows, expected {n}", columns[bad].len())));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table contains non-finite values".into()));
        }
        Ok(Self {
            channel_names,
            columns,
            timestamps: None,
            rejected_rows: 0,
        })
    }

    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.num_timestamps() {
            return Err(Error::dim("timestamps", self.num_timestamps(), timestamps.len()));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn num_timestamps(&self) -> usize {
        self.columns[0].len()
    }

    pub fn num_channels(&self) -> usize {
        self.columns.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn channel(&self, m: usize) -> &[f64] {
        &self.columns[m]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub(crate) fn columns_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.columns
    }

    pub fn value(&self, t: usize, m: usize) -> f64 {
        self.columns[m][t]
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Rows dropped during ingestion.
    pub fn rejected_rows(&self) -> usize {
        self.rejected_rows
    }

    /// Keeps the first `rows` timestamps.
    pub fn truncate(&mut self, rows: usize) {
        self.columns.iter_mut().for_each(|c| c.truncate(rows));
        if let Some(ts) = &mut self.timestamps {
            ts.truncate(rows);
        }
    }

    /// Writes the table as comma-separated text with a header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = Vec::with_capacity(self.num_channels() + 1);
        if self.timestamps.is_some() {
            header.push("date".to_string());
        }
        header.extend(self.channel_names.iter().cloned());
        w.write_record(&header)?;
        for t in 0..self.num_timestamps() {
            let mut row = Vec::with_capacity(header.len());
            if let Some(ts) = &self.timestamps {
                row.push(ts[t].clone());
            }
            row.extend(self.columns.iter().map(|c| format!("{:?}", c[t])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        Ok(())
    }
}

/// Reads a delimited file whose first row is a header and whose remaining
/// columns (after an optional timestamp column) are numeric.
pub fn load_csv(path: &Path, config: &CsvConfig) -> Result<TimeSeriesTable> {
    if !config.delimiter.is_ascii() {
        return Err(Error::config("data.delimiter", "must be a single ASCII character"));
    }
    let ingest = |row: usize, message: String| Error::Ingest {
        path: path.to_path_buf(),
        row,
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter as u8)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(ingest(1, "missing header row".into()));
    }

    let mut records = reader.records();
    let mut timestamp_column = config.timestamp_column;
    let mut channel_names: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut timestamps = Vec::new();
    let mut rejected = 0;
    let mut kept = 0;

    while config.max_rows.is_none_or(|max| kept < max) {
        let Some(record) = records.next() else { break };
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let has_ts = *timestamp_column.get_or_insert_with(|| {
            record.get(0).is_some_and(|c| c.parse::<f64>().is_err())
        });
        if channel_names.is_empty() {
            channel_names = header.iter().skip(usize::from(has_ts)).cloned().collect();
            if channel_names.is_empty() {
                return Err(ingest(1, "no value columns".into()));
            }
            if let Some(m) = config.expected_channels {
                if m != channel_names.len() {
                    return Err(ingest(1, format!("expected {m} value columns, found {}", channel_names.len())));
                }
            }
            columns = vec![Vec::new(); channel_names.len()];
        }
        if record.len() != header.len() {
            return Err(ingest(line, format!("expected {} columns, found {}", header.len(), record.len())));
        }
        let parsed: std::result::Result<Vec<f64>, String> = record
            .iter()
            .skip(usize::from(has_ts))
            .zip(&channel_names)
            .map(|(cell, name)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("column `{name}`: cannot parse `{cell}` as a number")),
            })
            .collect();
        match parsed {
            Ok(values) => {
                for (c, v) in columns.iter_mut().zip(values) {
                    c.push(v);
                }
                if has_ts {
                    timestamps.push(record.get(0).unwrap_or_default().to_string());
                }
                kept += 1;
            }
            Err(msg) if config.skip_invalid_rows => {
                log::warn!("{}: row {line}: {msg}; row dropped", path.display());
                rejected += 1;
            }
            Err(msg) => return Err(ingest(line, msg)),
        }
    }
    if kept == 0 {
        return Err(ingest(2, "no data rows".into()));
    }
    if rejected > 0 {
        log::warn!("{}: dropped {rejected} rows with invalid cells", path.display());
    }
    let mut table = TimeSeriesTable::from_columns(channel_names, columns)?;
    if timestamp_column == Some(true) {
        table = table.with_timestamps(timestamps)?;
    }
    table.rejected_rows = rejected;
    Ok(table)
}
