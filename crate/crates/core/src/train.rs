//! Seeded mini-batch Adam training on MSE with validation-based early stopping.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::exec::{map_chunks, Execution};
use crate::metrics::evaluate;
use crate::models::Trainable;
use crate::nn::{Adam, AdamConfig, GradBuffer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate after every epoch.
    pub lr_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub execution: Execution,
    /// Samples per gradient work unit. Fixed so that the summation order, and
    /// therefore the result, does not depend on the thread count.
    pub grad_chunk: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 100,
            learning_rate: 1e-3,
            lr_decay: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: 5,
            seed: 0,
            shuffle: true,
            execution: Execution::Parallel,
            grad_chunk: 4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| if ok { Ok(()) } else { Err(Error::config(format!("train.{field}"), msg)) };
        check(self.batch_size >= 1, "batch_size", "must be at least 1")?;
        check(self.max_epochs >= 1, "max_epochs", "must be at least 1")?;
        check(self.learning_rate > 0.0 && self.learning_rate.is_finite(), "learning_rate", "must be positive")?;
        check(self.lr_decay > 0.0 && self.lr_decay <= 1.0, "lr_decay", "must lie in (0, 1]")?;
        check((0.0..1.0).contains(&self.beta1), "beta1", "must lie in [0, 1)")?;
        check((0.0..1.0).contains(&self.beta2), "beta2", "must lie in [0, 1)")?;
        check(self.epsilon > 0.0, "epsilon", "must be positive")?;
        check(self.grad_chunk >= 1, "grad_chunk", "must be at least 1")
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch, each taken before its batch update.
    pub train_loss: f64,
    /// Validation MSE after the epoch (the training loss when there is no
    /// validation data).
    pub val_mse: f64,
    pub learning_rate: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_mse: f64,
    /// Full-pass training MSE at the returned parameters.
    pub final_train_loss: f64,
    pub stopped_early: bool,
}

impl TrainingLog {
    /// One comma-separated line per epoch, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_mse,learning_rate,elapsed_seconds\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{},{:?},{:?},{:?},{:.3}", e.epoch, e.train_loss, e.val_mse, e.learning_rate, e.elapsed_secs);
        }
        out
    }

    /// Same records without wall-clock times, for reproducibility checks.
    pub fn without_timings(&self) -> TrainingLog {
        let mut log = self.clone();
        log.epochs.iter_mut().for_each(|e| e.elapsed_secs = 0.0);
        log
    }
}

/// Summed loss and gradient over `indices`, reduced in chunk order.
pub fn batch_gradient<M, S>(model: &M, data: &S, indices: &[usize], chunk: usize, mode: Execution) -> Result<(f64, GradBuffer)>
where
    M: Trainable,
    S: SampleSet + ?Sized,
{
    let parts = map_chunks(indices.len(), chunk, mode, |range| -> Result<(f64, GradBuffer)> {
        let mut grad = model.new_grad_buffer();
        let mut loss = 0.0;
        for &i in &indices[range] {
            let (x, target) = data.sample(i);
            loss += model.accumulate_sample(x, target, &mut grad)?;
        }
        Ok((loss, grad))
    });
    let mut total: Option<(f64, GradBuffer)> = None;
    for part in parts {
        let (l, g) = part?;
        match &mut total {
            None => total = Some((l, g)),
            Some((tl, tg)) => {
                *tl += l;
                tg.add_assign(&g);
            }
        }
    }
    Ok(total.unwrap_or_else(|| (0.0, model.new_grad_buffer())))
}

/// Trains `model` and returns the parameters with the best validation MSE.
pub fn train<M, S, V>(mut model: M, train_set: &S, val_set: Option<&V>, config: &TrainConfig) -> Result<(M, TrainingLog)>
where
    M: Trainable,
    S: SampleSet + ?Sized,
    V: SampleSet + ?Sized,
{
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidInput("training split has no samples".into()));
    }
    let val_set = val_set.filter(|v| !v.is_empty());
    if val_set.is_none() {
        log::warn!("no validation samples; early stopping tracks the training loss");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(config.adam());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::new();
    let mut best: Option<(f64, usize, M)> = None;
    let mut since_best = 0;
    let mut stopped_early = false;
    let mut lr = config.learning_rate;
    let start = Instant::now();

    for epoch in 1..=config.max_epochs {
        adam.set_learning_rate(lr);
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let (loss_sum, mut grad) = batch_gradient(&model, train_set, batch, config.grad_chunk, config.execution)?;
            let mean_loss = loss_sum / batch.len() as f64;
            if !mean_loss.is_finite() || !grad.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b + 1,
                    loss: mean_loss,
                });
            }
            grad.scale(1.0 / batch.len() as f64);
            model.zero_grads();
            model.accumulate_grads(&grad);
            adam.step(&mut model)?;
            epoch_loss += loss_sum;
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let val_mse = match val_set {
            Some(v) => evaluate(&model, v, config.execution)?.mse,
            None => evaluate(&model, train_set, config.execution)?.mse,
        };
        if !val_mse.is_finite() {
            return Err(Error::Diverged {
                epoch,
                batch: 0,
                loss: val_mse,
            });
        }
        log::info!("epoch {epoch}: train {train_loss:.6} val {val_mse:.6} lr {lr:.3e}");
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_mse,
            learning_rate: lr,
            elapsed_secs: start.elapsed().as_secs_f64(),
        });

        if best.as_ref().is_none_or(|(b, _, _)| val_mse < *b) {
            best = Some((val_mse, epoch, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = epoch < config.max_epochs;
                break;
            }
        }
        lr *= config.lr_decay;
    }

    let (best_val_mse, best_epoch, mut model) = best.expect("at least one epoch ran");
    model.zero_grads();
    let final_train_loss = evaluate(&model, train_set, config.execution)?.mse;
    Ok((
        model,
        TrainingLog {
            epochs,
            best_epoch,
            best_val_mse,
            final_train_loss,
            stopped_early,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InMemorySamples;
    use crate::models::{LinearModel, ModelKind, ModelSpec, Model};
    use crate::nn::LinearLayer;
    use rand::Rng;

    fn linear_problem(n: usize, l: usize, t: usize, seed: u64) -> InMemorySamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..l * t).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let x: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = a.chunks(l).map(|row| row.iter().zip(&x).map(|(w, v)| w * v).sum()).collect();
            xs.push(x);
            ys.push(y);
        }
        InMemorySamples::new(xs, ys).unwrap()
    }

    #[test]
    fn identical_seeds_give_identical_logs() {
        let data = linear_problem(200, 6, 3, 1);
        let val = linear_problem(50, 6, 3, 2);
        let cfg = TrainConfig { max_epochs: 4, learning_rate: 5e-3, ..TrainConfig::default() };
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let m = LinearModel::init(6, 3, &mut rng);
            train(m, &data, Some(&val), &cfg).unwrap()
        };
        let (m1, l1) = run();
        let (m2, l2) = run();
        assert_eq!(l1.without_timings(), l2.without_timings());
        assert_eq!(m1, m2);
    }

    #[test]
    fn sequential_and_parallel_training_agree_bitwise() {
        let data = linear_problem(300, 8, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = ModelSpec { qubits: 2, layers: 1, ..ModelSpec::new(ModelKind::Qultsf, 8, 4) };
        let m = Model::init(&spec, &mut rng).unwrap();
        let mk = |execution| TrainConfig { max_epochs: 2, execution, ..TrainConfig::default() };
        let (a, la) = train(m.clone(), &data, None::<&InMemorySamples>, &mk(Execution::Sequential)).unwrap();
        let (b, lb) = train(m, &data, None::<&InMemorySamples>, &mk(Execution::Parallel)).unwrap();
        assert_eq!(a, b);
        assert_eq!(la.without_timings(), lb.without_timings());
    }

    #[test]
    fn patience_zero_stops_at_first_non_improving_epoch() {
        let data = linear_problem(100, 4, 2, 4);
        let val = linear_problem(40, 4, 2, 5);
        // a huge learning rate makes validation bounce quickly
        let cfg = TrainConfig { max_epochs: 50, patience: 0, learning_rate: 0.5, ..TrainConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, log) = train(LinearModel::init(4, 2, &mut rng), &data, Some(&val), &cfg).unwrap();
        assert!(log.stopped_early);
        assert_eq!(log.epochs.len(), log.best_epoch + 1);
        let last = log.epochs.last().unwrap();
        assert!(last.val_mse >= log.best_val_mse);
        assert!(log.epochs[..log.epochs.len() - 1].windows(2).all(|w| w[1].val_mse < w[0].val_mse));
    }

    #[test]
    fn divergence_is_reported() {
        let xs = vec![vec![1e300, 1e300]; 4];
        let ys = vec![vec![0.0]; 4];
        let data = InMemorySamples::new(xs, ys).unwrap();
        let m = LinearModel::new(LinearLayer::from_parts(2, 1, vec![1e10, 1e10], vec![0.0]).unwrap());
        let err = train(m, &data, None::<&InMemorySamples>, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Diverged { epoch: 1, batch: 1, .. }), "{err}");
    }

    #[test]
    fn config_validation_names_fields() {
        let bad = TrainConfig { batch_size: 0, ..TrainConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "train.batch_size"));
        let bad = TrainConfig { max_epochs: 0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn final_loss_matches_evaluation() {
        let data = linear_problem(120, 5, 2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = TrainConfig { max_epochs: 3, learning_rate: 1e-2, ..TrainConfig::default() };
        let (m, log) = train(LinearModel::init(5, 2, &mut rng), &data, None::<&InMemorySamples>, &cfg).unwrap();
        let r = evaluate(&m, &data, Execution::Sequential).unwrap();
        assert!((r.mse - log.final_train_loss).abs() < 1e-9);
    }
}
