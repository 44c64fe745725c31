use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::network::{Loss, Network};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingConfig {
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffling.
    pub seed: u64,
    /// Standardize each input position with training-set mean and sd.
    pub standardize_inputs: bool,
    /// Standardize regression targets with their pooled training mean and sd.
    pub standardize_targets: bool,
    pub schedule: LrSchedule,
}

/// Per-epoch learning-rate multiplier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LrSchedule {
    #[default]
    Constant,
    /// Half-cosine decay from the base rate at the first epoch towards zero
    /// after the last, so short runs end on a settled model.
    Cosine,
}

impl LrSchedule {
    /// Multiplier for 1-based `epoch` of `epochs`.
    pub fn factor(&self, epoch: usize, epochs: usize) -> f64 {
        match self {
            LrSchedule::Constant => 1.0,
            LrSchedule::Cosine => {
                let progress = (epoch - 1) as f64 / epochs as f64;
                0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
            }
        }
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            epochs: 200,
            batch_size: 32,
            seed: 0,
            standardize_inputs: true,
            standardize_targets: true,
            schedule: LrSchedule::Constant,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.adam.learning_rate >= 0.0) || !self.adam.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and nonnegative, got {}",
                self.adam.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "epochs and batch size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-position affine standardization fitted on training data.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub sd: Vec<T>,
}

impl<T: Real> Standardizer<T> {
    /// Statistics per item position (e.g. per timestep of `[N, T, 1]`).
    pub fn per_position(x: &Tensor<T>) -> Self {
        let n = x.batch();
        let item = x.item_len();
        let nf = T::from_usize_lossy(n);
        let mut mean = vec![T::zero(); item];
        for row in x.data().chunks(item) {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = vec![T::zero(); item];
        for row in x.data().chunks(item) {
            for ((s, &m), &v) in var.iter_mut().zip(&mean).zip(row) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var.into_iter().map(|s| floor_sd((s / nf).sqrt())).collect();
        Self { mean, sd }
    }

    /// One pooled mean and sd over every entry.
    pub fn pooled(x: &Tensor<T>) -> Self {
        let m = T::from_usize_lossy(x.data().len());
        let mean = x.data().iter().copied().sum::<T>() / m;
        let var = x.data().iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / m;
        Self {
            mean: vec![mean],
            sd: vec![floor_sd(var.sqrt())],
        }
    }

    fn stat(&self, k: usize) -> (T, T) {
        let k = if self.mean.len() == 1 { 0 } else { k };
        (self.mean[k], self.sd[k])
    }

    pub fn apply(&self, x: &Tensor<T>) -> Tensor<T> {
        let item = x.item_len();
        let mut out = x.clone();
        for row in out.data_mut().chunks_mut(item) {
            for (k, v) in row.iter_mut().enumerate() {
                let (m, s) = self.stat(k);
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn invert(&self, x: &Tensor<T>) -> Tensor<T> {
        let item = x.item_len();
        let mut out = x.clone();
        for row in out.data_mut().chunks_mut(item) {
            for (k, v) in row.iter_mut().enumerate() {
                let (m, s) = self.stat(k);
                *v = *v * s + m;
            }
        }
        out
    }
}

fn floor_sd<T: Real>(sd: T) -> T {
    if sd > T::epsilon() {
        sd
    } else {
        T::one()
    }
}

/// A network together with the scalings it was trained under.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel<T> {
    pub net: Network<T>,
    pub input_scaler: Option<Standardizer<T>>,
    pub target_scaler: Option<Standardizer<T>>,
}

impl<T: Real> TrainedModel<T> {
    /// Network output on raw inputs, mapped back to raw target units.
    pub fn predict(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let xs = match &self.input_scaler {
            Some(s) => s.apply(x),
            None => x.clone(),
        };
        let out = self.net.forward(&xs)?;
        Ok(match &self.target_scaler {
            Some(s) => s.invert(&out),
            None => out,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: TrainedModel<T>,
    /// Mean minibatch loss per epoch, in standardized units.
    pub loss_trace: Vec<T>,
}

/// Mini-batch Adam. Samples are reshuffled every epoch by a generator seeded
/// from `config.seed`, so a run is bit-reproducible on one thread.
pub fn train<T: Real>(
    mut net: Network<T>,
    x: &Tensor<T>,
    y: &Tensor<T>,
    config: &TrainingConfig,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    let n = x.batch();
    if n == 0 {
        return Err(Error::EmptyInput("no training samples".into()));
    }
    if y.batch() != n {
        return Err(Error::Dimension(format!("{n} inputs but {} targets", y.batch())));
    }
    if !x.all_finite() || !y.all_finite() {
        return Err(Error::NonFinite("training data".into()));
    }
    let input_scaler = config.standardize_inputs.then(|| Standardizer::per_position(x));
    let target_scaler = (config.standardize_targets && net.loss == Loss::Mse).then(|| Standardizer::pooled(y));
    let xs = input_scaler.as_ref().map_or_else(|| x.clone(), |s| s.apply(x));
    let ys = target_scaler.as_ref().map_or_else(|| y.clone(), |s| s.apply(y));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(&net.params());
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let adam = AdamConfig {
            learning_rate: config.adam.learning_rate * config.schedule.factor(epoch, config.epochs),
            ..config.adam
        };
        let mut total = T::zero();
        for chunk in order.chunks(config.batch_size) {
            let xb = xs.gather(chunk);
            let yb = ys.gather(chunk);
            let (loss, grads) = match net.loss_and_grad(&xb, &yb) {
                Ok(v) => v,
                Err(Error::NonFinite(_)) => return Err(Error::TrainingDiverged { epoch }),
                Err(e) => return Err(e),
            };
            total += loss * T::from_usize_lossy(chunk.len());
            let mut params = net.params_mut();
            adam_step(&mut params, &grads.tensors, &mut state, &adam);
        }
        let mean = total / T::from_usize_lossy(n);
        if !mean.is_finite() || net.params().iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::TrainingDiverged { epoch });
        }
        trace.push(mean);
    }

    Ok(TrainOutcome {
        model: TrainedModel {
            net,
            input_scaler,
            target_scaler,
        },
        loss_trace: trace,
    })
}
