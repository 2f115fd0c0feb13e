//! Dataset ingestion and the evaluation protocol: chronological
//! train/validation/test splits, train-only standardization and stride-1
//! sliding windows under channel independence.

mod split;
mod standardize;
pub mod synth;
mod table;
mod window;

pub use split::{make_splits, SplitSpec};
pub use standardize::{standardize, Standardizer};
pub use table::{load_csv, CsvConfig, TimeSeriesTable};
pub use window::{window_count, window_iter, window_starts, InMemorySamples, SampleSet, WindowDataset, WindowSample};
