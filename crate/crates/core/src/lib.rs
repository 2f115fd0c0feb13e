//! Hybrid quantum-classical long-term time series forecasting.
//!
//! The crate bundles everything needed to train and benchmark the QuLTSF
//! model against linear forecasting baselines:
//!
//! - [`qsim`]: exact dense statevector simulation of the variational hidden
//!   layer (amplitude embedding, Rot/CNOT hardware-efficient ansatz, Pauli-Z
//!   readout) with adjoint and parameter-shift gradients.
//! - [`nn`]: linear layers, MSE loss, Adam and text checkpoints.
//! - [`models`]: QuLTSF, Linear, NLinear and DLinear forecasters.
//! - [`data`]: CSV ingestion, chronological splits, standardization and
//!   sliding windows under channel independence.
//! - [`train`] and [`metrics`]: the seeded mini-batch training loop and
//!   MSE/MAE evaluation.
//! - [`experiment`]: config files, single runs and the lookback/horizon grid.
//!
//! Batch work (per-sample gradients, evaluation sweeps) fans out over rayon
//! when the `parallel` feature is enabled and falls back to a sequential loop
//! otherwise; see [`exec`]. Both paths produce bit-identical results.

pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod qsim;
pub mod train;

pub use error::{Error, Result};
