use rand::Rng;

use super::decompose::decompose;
use super::{checkpoint_dims, Forecaster, Trainable};
use crate::error::{ensure_len, Error, Result};
use crate::nn::{Checkpoint, GradBuffer, LinearLayer, Parameterized, Tensor};

pub(crate) fn layer_tensors(ckpt: &mut Checkpoint, prefix: &str, layer: &LinearLayer) {
    let (i, o) = (layer.in_dim(), layer.out_dim());
    ckpt.tensors.push(Tensor {
        name: format!("{prefix}.weight"),
        shape: vec![o, i],
        values: layer.weights().to_vec(),
    });
    ckpt.tensors.push(Tensor {
        name: format!("{prefix}.bias"),
        shape: vec![o],
        values: layer.bias().to_vec(),
    });
}

pub(crate) fn layer_from(ckpt: &Checkpoint, prefix: &str, in_dim: usize, out_dim: usize) -> Result<LinearLayer> {
    let w = ckpt.tensor(&format!("{prefix}.weight"))?;
    let b = ckpt.tensor(&format!("{prefix}.bias"))?;
    if w.shape != [out_dim, in_dim] || b.shape != [out_dim] {
        return Err(Error::Checkpoint(format!("`{prefix}` has unexpected shape {:?}", w.shape)));
    }
    LinearLayer::from_parts(in_dim, out_dim, w.values.clone(), b.values.clone())
}

pub(crate) fn base_checkpoint(kind: &str, lookback: usize, horizon: usize) -> Checkpoint {
    let mut c = Checkpoint::new(kind);
    c.meta.insert("lookback".into(), lookback.to_string());
    c.meta.insert("horizon".into(), horizon.to_string());
    c
}

/// Single `T × L` linear layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub layer: LinearLayer,
}

impl LinearModel {
    pub fn init<R: Rng + ?Sized>(lookback: usize, horizon: usize, rng: &mut R) -> Self {
        Self {
            layer: LinearLayer::init_uniform(lookback, horizon, rng),
        }
    }

    pub fn new(layer: LinearLayer) -> Self {
        Self { layer }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut c = base_checkpoint("linear", self.lookback(), self.horizon());
        layer_tensors(&mut c, "linear", &self.layer);
        c
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (l, t) = checkpoint_dims(ckpt)?;
        Ok(Self::new(layer_from(ckpt, "linear", l, t)?))
    }
}

impl Forecaster for LinearModel {
    fn lookback(&self) -> usize {
        self.layer.in_dim()
    }

    fn horizon(&self) -> usize {
        self.layer.out_dim()
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.layer.forward(x)
    }
}

impl Parameterized for LinearModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        self.layer.visit_params(f)
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.layer.visit_grads_mut(f)
    }

    fn param_lens(&self) -> Vec<usize> {
        self.layer.param_lens()
    }
}

impl Trainable for LinearModel {
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()> {
        let [gw, gb] = grad.tensors.as_mut_slice() else {
            return Err(Error::dim("linear gradient tensors", 2, grad.tensors.len()));
        };
        self.layer.backward_into(x, upstream, gw, gb, false)?;
        Ok(())
    }
}

/// Linear layer applied to the lookback minus its last value, which is then
/// added back to every forecast step.
#[derive(Debug, Clone, PartialEq)]
pub struct NLinearModel {
    pub layer: LinearLayer,
}

impl NLinearModel {
    pub fn init<R: Rng + ?Sized>(lookback: usize, horizon: usize, rng: &mut R) -> Self {
        Self {
            layer: LinearLayer::init_uniform(lookback, horizon, rng),
        }
    }

    pub fn new(layer: LinearLayer) -> Self {
        Self { layer }
    }

    fn centered(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        ensure_len("nlinear input", self.layer.in_dim(), x.len())?;
        let last = *x.last().ok_or_else(|| Error::InvalidInput("empty lookback".into()))?;
        Ok((x.iter().map(|v| v - last).collect(), last))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut c = base_checkpoint("nlinear", self.lookback(), self.horizon());
        layer_tensors(&mut c, "linear", &self.layer);
        c
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (l, t) = checkpoint_dims(ckpt)?;
        Ok(Self::new(layer_from(ckpt, "linear", l, t)?))
    }
}

impl Forecaster for NLinearModel {
    fn lookback(&self) -> usize {
        self.layer.in_dim()
    }

    fn horizon(&self) -> usize {
        self.layer.out_dim()
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (centered, last) = self.centered(x)?;
        let mut y = self.layer.forward(&centered)?;
        y.iter_mut().for_each(|v| *v += last);
        Ok(y)
    }
}

impl Parameterized for NLinearModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        self.layer.visit_params(f)
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.layer.visit_grads_mut(f)
    }

    fn param_lens(&self) -> Vec<usize> {
        self.layer.param_lens()
    }
}

impl Trainable for NLinearModel {
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()> {
        let (centered, _) = self.centered(x)?;
        let [gw, gb] = grad.tensors.as_mut_slice() else {
            return Err(Error::dim("nlinear gradient tensors", 2, grad.tensors.len()));
        };
        self.layer.backward_into(&centered, upstream, gw, gb, false)?;
        Ok(())
    }
}

/// Separate linear layers on the moving-average trend and the seasonal
/// remainder, summed.
#[derive(Debug, Clone, PartialEq)]
pub struct DLinearModel {
    pub trend: LinearLayer,
    pub seasonal: LinearLayer,
    kernel: usize,
}

impl DLinearModel {
    pub fn init<R: Rng + ?Sized>(lookback: usize, horizon: usize, kernel: usize, rng: &mut R) -> Result<Self> {
        let trend = LinearLayer::init_uniform(lookback, horizon, rng);
        let seasonal = LinearLayer::init_uniform(lookback, horizon, rng);
        Self::new(trend, seasonal, kernel)
    }

    pub fn new(trend: LinearLayer, seasonal: LinearLayer, kernel: usize) -> Result<Self> {
        if trend.in_dim() != seasonal.in_dim() || trend.out_dim() != seasonal.out_dim() {
            return Err(Error::InvalidInput("trend and seasonal layers differ in shape".into()));
        }
        if kernel.is_multiple_of(2) || kernel >= 2 * trend.in_dim() {
            return Err(Error::InvalidInput(format!("invalid moving-average kernel {kernel}")));
        }
        Ok(Self {
            trend,
            seasonal,
            kernel,
        })
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut c = base_checkpoint("dlinear", self.lookback(), self.horizon());
        c.meta.insert("kernel".into(), self.kernel.to_string());
        layer_tensors(&mut c, "trend", &self.trend);
        layer_tensors(&mut c, "seasonal", &self.seasonal);
        c
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (l, t) = checkpoint_dims(ckpt)?;
        Self::new(
            layer_from(ckpt, "trend", l, t)?,
            layer_from(ckpt, "seasonal", l, t)?,
            ckpt.meta_usize("kernel")?,
        )
    }
}

impl Forecaster for DLinearModel {
    fn lookback(&self) -> usize {
        self.trend.in_dim()
    }

    fn horizon(&self) -> usize {
        self.trend.out_dim()
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("dlinear input", self.lookback(), x.len())?;
        let parts = decompose(x, self.kernel)?;
        let a = self.trend.forward(&parts.trend)?;
        let b = self.seasonal.forward(&parts.seasonal)?;
        Ok(a.iter().zip(&b).map(|(u, v)| u + v).collect())
    }
}

impl Parameterized for DLinearModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        self.trend.visit_params(f);
        self.seasonal.visit_params(f);
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.trend.visit_grads_mut(f);
        self.seasonal.visit_grads_mut(f);
    }

    fn param_lens(&self) -> Vec<usize> {
        let mut v = self.trend.param_lens();
        v.extend(self.seasonal.param_lens());
        v
    }
}

impl Trainable for DLinearModel {
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()> {
        ensure_len("dlinear input", self.lookback(), x.len())?;
        let parts = decompose(x, self.kernel)?;
        let [tw, tb, sw, sb] = grad.tensors.as_mut_slice() else {
            return Err(Error::dim("dlinear gradient tensors", 4, grad.tensors.len()));
        };
        self.trend.backward_into(&parts.trend, upstream, tw, tb, false)?;
        self.seasonal.backward_into(&parts.seasonal, upstream, sw, sb, false)?;
        Ok(())
    }
}

/// Naive forecaster repeating the last observed value; used as a metric
/// reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepeatLast {
    pub lookback: usize,
    pub horizon: usize,
}

impl Forecaster for RepeatLast {
    fn lookback(&self) -> usize {
        self.lookback
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("repeat-last input", self.lookback, x.len())?;
        let last = *x.last().ok_or_else(|| Error::InvalidInput("empty lookback".into()))?;
        Ok(vec![last; self.horizon])
    }
}
