//! MSE and MAE averaged over samples, channels and horizon steps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::SampleSet;
use crate::error::{ensure_len, Error, Result};
use crate::exec::{map_chunks, Execution};
use crate::models::Forecaster;

const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub mae: f64,
    /// Mean squared error at each horizon step.
    pub per_horizon_mse: Vec<f64>,
    pub per_horizon_mae: Vec<f64>,
    pub samples: usize,
}

impl MetricsReport {
    fn from_sums(sq: Vec<f64>, abs: Vec<f64>, samples: usize) -> Self {
        let n = samples as f64;
        let t = sq.len() as f64;
        let mse = sq.iter().sum::<f64>() / (n * t);
        let mae = abs.iter().sum::<f64>() / (n * t);
        Self {
            mse,
            mae,
            per_horizon_mse: sq.into_iter().map(|s| s / n).collect(),
            per_horizon_mae: abs.into_iter().map(|s| s / n).collect(),
            samples,
        }
    }

    /// Metrics of precomputed predictions against the targets of `data`.
    pub fn from_predictions<S: SampleSet + ?Sized>(predictions: &[Vec<f64>], data: &S) -> Result<Self> {
        ensure_len("prediction count", data.len(), predictions.len())?;
        if data.is_empty() {
            return Err(Error::InvalidInput("cannot evaluate an empty split".into()));
        }
        let horizon = data.sample(0).1.len();
        let mut sq = vec![0.0; horizon];
        let mut abs = vec![0.0; horizon];
        for (i, pred) in predictions.iter().enumerate() {
            let (_, target) = data.sample(i);
            accumulate(pred, target, &mut sq, &mut abs)?;
        }
        Ok(Self::from_sums(sq, abs, data.len()))
    }

    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mse = {:?}", self.mse);
        let _ = writeln!(out, "mae = {:?}", self.mae);
        let _ = writeln!(out, "samples = {}", self.samples);
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "per_horizon_mse = {}", join(&self.per_horizon_mse));
        let _ = writeln!(out, "per_horizon_mae = {}", join(&self.per_horizon_mae));
        out
    }
}

fn accumulate(pred: &[f64], target: &[f64], sq: &mut [f64], abs: &mut [f64]) -> Result<()> {
    ensure_len("prediction length", target.len(), pred.len())?;
    ensure_len("horizon", sq.len(), pred.len())?;
    for (h, (p, t)) in pred.iter().zip(target).enumerate() {
        let d = p - t;
        sq[h] += d * d;
        abs[h] += d.abs();
    }
    Ok(())
}

/// Evaluates `model` on every sample of `data`.
pub fn evaluate<F, S>(model: &F, data: &S, mode: Execution) -> Result<MetricsReport>
where
    F: Forecaster + ?Sized,
    S: SampleSet + ?Sized,
{
    if data.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate an empty split".into()));
    }
    let horizon = model.horizon();
    let partials = map_chunks(data.len(), EVAL_CHUNK, mode, |range| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut sq = vec![0.0; horizon];
        let mut abs = vec![0.0; horizon];
        for i in range {
            let (x, target) = data.sample(i);
            let pred = model.predict(x)?;
            accumulate(&pred, target, &mut sq, &mut abs)?;
        }
        Ok((sq, abs))
    });
    let mut sq = vec![0.0; horizon];
    let mut abs = vec![0.0; horizon];
    for part in partials {
        let (s, a) = part?;
        sq.iter_mut().zip(&s).for_each(|(x, y)| *x += y);
        abs.iter_mut().zip(&a).for_each(|(x, y)| *x += y);
    }
    Ok(MetricsReport::from_sums(sq, abs, data.len()))
}

/// Predictions for every sample, in sample order.
pub fn predict_all<F, S>(model: &F, data: &S, mode: Execution) -> Result<Vec<Vec<f64>>>
where
    F: Forecaster + ?Sized,
    S: SampleSet + ?Sized,
{
    let chunks = map_chunks(data.len(), EVAL_CHUNK, mode, |range| {
        range.map(|i| model.predict(data.sample(i).0)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(data.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InMemorySamples;
    use crate::models::RepeatLast;

    struct Oracle(Vec<Vec<f64>>);

    impl Forecaster for Oracle {
        fn lookback(&self) -> usize {
            1
        }
        fn horizon(&self) -> usize {
            self.0[0].len()
        }
        fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0[x[0] as usize].clone())
        }
    }

    #[test]
    fn perfect_predictions_score_zero() {
        let targets = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        let data = InMemorySamples::new(vec![vec![0.0], vec![1.0]], targets.clone()).unwrap();
        let r = evaluate(&Oracle(targets), &data, Execution::Sequential).unwrap();
        assert_eq!((r.mse, r.mae), (0.0, 0.0));
    }

    #[test]
    fn single_sample_hand_arithmetic() {
        let data = InMemorySamples::new(vec![vec![0.0]], vec![vec![1.0, 1.0]]).unwrap();
        let r = evaluate(&Oracle(vec![vec![1.0, 3.0]]), &data, Execution::Sequential).unwrap();
        assert_eq!(r.per_horizon_mse, vec![0.0, 4.0]);
        assert_eq!(r.per_horizon_mae, vec![0.0, 2.0]);
        assert_eq!((r.mse, r.mae), (2.0, 1.0));
    }

    #[test]
    fn empty_split_is_an_error() {
        let data = InMemorySamples::default();
        assert!(evaluate(&RepeatLast { lookback: 1, horizon: 1 }, &data, Execution::Sequential).is_err());
    }

    #[test]
    fn aggregate_matches_recomputation_from_predictions() {
        let inputs: Vec<Vec<f64>> = (0..700).map(|i| (0..5).map(|j| ((i * 7 + j) as f64 * 0.13).sin()).collect()).collect();
        let targets: Vec<Vec<f64>> = (0..700).map(|i| (0..3).map(|j| ((i * 3 + j) as f64 * 0.29).cos()).collect()).collect();
        let data = InMemorySamples::new(inputs, targets).unwrap();
        let model = RepeatLast { lookback: 5, horizon: 3 };
        let preds = predict_all(&model, &data, Execution::Parallel).unwrap();
        let r = evaluate(&model, &data, Execution::Parallel).unwrap();
        let per_sample: Vec<f64> = preds
            .iter()
            .enumerate()
            .map(|(i, p)| p.iter().zip(&data.targets[i]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 3.0)
            .collect();
        let mean = per_sample.iter().sum::<f64>() / 700.0;
        assert!((r.mse - mean).abs() < 1e-9);
        let again = MetricsReport::from_predictions(&preds, &data).unwrap();
        assert!((again.mse - r.mse).abs() < 1e-12 && (again.mae - r.mae).abs() < 1e-12);
        let seq = evaluate(&model, &data, Execution::Sequential).unwrap();
        assert_eq!(seq, r);
    }
}
