//! Forecasting models mapping a length-`L` univariate lookback to a length-`T`
//! forecast. One instance is shared by every channel.

mod baselines;
mod decompose;
mod qultsf;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{DLinearModel, LinearModel, NLinearModel, RepeatLast};
pub use decompose::{decompose, DecompositionPair};
pub use qultsf::{ForwardTrace, QuLTSFModel};

use crate::error::{Error, Result};
use crate::nn::{mse_loss, Checkpoint, GradBuffer, Parameterized};

/// Anything that turns a lookback window into a forecast.
pub trait Forecaster: Sync {
    fn lookback(&self) -> usize;
    fn horizon(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// A forecaster trainable by backpropagation.
pub trait Trainable: Forecaster + Parameterized + Clone + Send {
    /// Propagates `upstream = ∂loss/∂prediction` for input `x`, adding the
    /// parameter gradients into `grad`.
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()>;

    /// Forward, MSE against `target`, backward. Returns the sample loss.
    fn accumulate_sample(&self, x: &[f64], target: &[f64], grad: &mut GradBuffer) -> Result<f64> {
        let pred = self.predict(x)?;
        let (loss, upstream) = mse_loss(&pred, target)?;
        self.backward_sample(x, &upstream, grad)?;
        Ok(loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qultsf,
    Linear,
    Nlinear,
    Dlinear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Qultsf, ModelKind::Linear, ModelKind::Nlinear, ModelKind::Dlinear];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Qultsf => "qultsf",
            ModelKind::Linear => "linear",
            ModelKind::Nlinear => "nlinear",
            ModelKind::Dlinear => "dlinear",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config("model.kind", format!("unknown model `{s}` (expected qultsf, linear, nlinear or dlinear)")))
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lookback: usize,
    pub horizon: usize,
    pub qubits: usize,
    pub layers: usize,
    pub kernel: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, lookback: usize, horizon: usize) -> Self {
        Self {
            kind,
            lookback,
            horizon,
            qubits: 10,
            layers: 3,
            kernel: 25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 {
            return Err(Error::config("model.lookback", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("model.horizon", "must be at least 1"));
        }
        match self.kind {
            ModelKind::Qultsf => {
                if self.qubits == 0 || self.qubits > crate::qsim::MAX_QUBITS {
                    return Err(Error::config("model.qubits", format!("must be in 1..={}", crate::qsim::MAX_QUBITS)));
                }
                if self.layers == 0 {
                    return Err(Error::config("model.layers", "must be at least 1"));
                }
            }
            ModelKind::Dlinear => {
                if self.kernel.is_multiple_of(2) || self.kernel >= 2 * self.lookback {
                    return Err(Error::config("model.kernel", "must be odd and at most 2·lookback − 1"));
                }
            }
            ModelKind::Linear | ModelKind::Nlinear => {}
        }
        Ok(())
    }

    /// Trainable parameter count implied by the spec.
    pub fn param_count(&self) -> usize {
        let (l, t) = (self.lookback, self.horizon);
        match self.kind {
            ModelKind::Qultsf => {
                let d = 1usize << self.qubits;
                d * l + d + crate::qsim::CircuitParams::count(self.qubits, self.layers) + t * self.qubits + t
            }
            ModelKind::Linear | ModelKind::Nlinear => t * l + t,
            ModelKind::Dlinear => 2 * (t * l + t),
        }
    }

    /// Number of circuit angles (zero for classical models).
    pub fn circuit_param_count(&self) -> usize {
        match self.kind {
            ModelKind::Qultsf => crate::qsim::CircuitParams::count(self.qubits, self.layers),
            _ => 0,
        }
    }
}

/// Any of the four forecasting models.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Qultsf(QuLTSFModel),
    Linear(LinearModel),
    Nlinear(NLinearModel),
    Dlinear(DLinearModel),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $e:expr) => {
        match $self {
            Model::Qultsf($m) => $e,
            Model::Linear($m) => $e,
            Model::Nlinear($m) => $e,
            Model::Dlinear($m) => $e,
        }
    };
}

impl Model {
    /// Freshly initialized model; all randomness comes from `rng`.
    pub fn init<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let (l, t) = (spec.lookback, spec.horizon);
        Ok(match spec.kind {
            ModelKind::Qultsf => Model::Qultsf(QuLTSFModel::init(l, t, spec.qubits, spec.layers, rng)?),
            ModelKind::Linear => Model::Linear(LinearModel::init(l, t, rng)),
            ModelKind::Nlinear => Model::Nlinear(NLinearModel::init(l, t, rng)),
            ModelKind::Dlinear => Model::Dlinear(DLinearModel::init(l, t, spec.kernel, rng)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Qultsf(_) => ModelKind::Qultsf,
            Model::Linear(_) => ModelKind::Linear,
            Model::Nlinear(_) => ModelKind::Nlinear,
            Model::Dlinear(_) => ModelKind::Dlinear,
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        dispatch!(self, m => m.to_checkpoint())
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let kind: ModelKind = ckpt.kind.parse().map_err(|_| Error::Checkpoint(format!("unknown model kind `{}`", ckpt.kind)))?;
        Ok(match kind {
            ModelKind::Qultsf => Model::Qultsf(QuLTSFModel::from_checkpoint(ckpt)?),
            ModelKind::Linear => Model::Linear(LinearModel::from_checkpoint(ckpt)?),
            ModelKind::Nlinear => Model::Nlinear(NLinearModel::from_checkpoint(ckpt)?),
            ModelKind::Dlinear => Model::Dlinear(DLinearModel::from_checkpoint(ckpt)?),
        })
    }
}

impl Forecaster for Model {
    fn lookback(&self) -> usize {
        dispatch!(self, m => m.lookback())
    }

    fn horizon(&self) -> usize {
        dispatch!(self, m => m.horizon())
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, m => m.predict(x))
    }
}

impl Parameterized for Model {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        dispatch!(self, m => m.visit_params(f))
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        dispatch!(self, m => m.visit_grads_mut(f))
    }

    fn param_lens(&self) -> Vec<usize> {
        dispatch!(self, m => m.param_lens())
    }
}

impl Trainable for Model {
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()> {
        dispatch!(self, m => m.backward_sample(x, upstream, grad))
    }
}

pub(crate) fn checkpoint_dims(ckpt: &Checkpoint) -> Result<(usize, usize)> {
    Ok((ckpt.meta_usize("lookback")?, ckpt.meta_usize("horizon")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_counts_match_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (n, k, l, t) in [(1, 1, 3, 2), (3, 2, 8, 4), (4, 3, 12, 5)] {
            let spec = ModelSpec { qubits: n, layers: k, ..ModelSpec::new(ModelKind::Qultsf, l, t) };
            let m = Model::init(&spec, &mut rng).unwrap();
            let d = 1 << n;
            assert_eq!(m.num_params(), d * l + d + 3 * n * k + t * n + t);
            assert_eq!(spec.param_count(), m.num_params());
        }
        let spec = ModelSpec { kernel: 5, ..ModelSpec::new(ModelKind::Dlinear, 6, 3) };
        assert_eq!(Model::init(&spec, &mut rng).unwrap().num_params(), 2 * (18 + 3));
        let reference = ModelSpec::new(ModelKind::Qultsf, 336, 96);
        assert_eq!(reference.circuit_param_count(), 90);
    }

    #[test]
    fn model_names_parse() {
        assert_eq!("NLinear".parse::<ModelKind>().unwrap(), ModelKind::Nlinear);
        assert!("transformer".parse::<ModelKind>().is_err());
    }

    #[test]
    fn invalid_specs_name_their_field() {
        let bad = ModelSpec { qubits: 0, ..ModelSpec::new(ModelKind::Qultsf, 4, 2) };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "model.qubits"));
        let bad = ModelSpec { kernel: 4, ..ModelSpec::new(ModelKind::Dlinear, 10, 2) };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "model.kernel"));
        let bad = ModelSpec::new(ModelKind::Linear, 0, 2);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn checkpoints_round_trip_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in ModelKind::ALL {
            let spec = ModelSpec { qubits: 2, layers: 2, kernel: 3, ..ModelSpec::new(kind, 6, 3) };
            let m = Model::init(&spec, &mut rng).unwrap();
            let text = m.to_checkpoint().to_text();
            let back = Model::from_checkpoint(&Checkpoint::parse(&text).unwrap()).unwrap();
            let x = [0.1, -0.3, 0.5, 0.2, 0.0, 1.0];
            assert_eq!(m.predict(&x).unwrap(), back.predict(&x).unwrap());
            assert_eq!(back.kind(), kind);
        }
    }
}
