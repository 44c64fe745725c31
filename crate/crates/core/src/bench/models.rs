use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, ScalarResponses};
use crate::freg::{self, FunctionalPredictor, ScalarPredictor};
use crate::neuro::{train, AdamConfig, Head, Network, Tensor, TrainingConfig, Widths};

/// Every estimator the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    FlmBasis,
    Fpca,
    KernelNp,
    LogisticFlm,
    Concurrent,
    FfLinear,
    Snn,
    Fnn,
    Dr,
    Cr,
}

/// What a model predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Continuous,
    Binary,
    Functional,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::FlmBasis,
        ModelKind::Fpca,
        ModelKind::KernelNp,
        ModelKind::LogisticFlm,
        ModelKind::Concurrent,
        ModelKind::FfLinear,
        ModelKind::Snn,
        ModelKind::Fnn,
        ModelKind::Dr,
        ModelKind::Cr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::FlmBasis => "FLM-basis",
            ModelKind::Fpca => "FLM-FPCA",
            ModelKind::KernelNp => "kernel-NP",
            ModelKind::LogisticFlm => "logistic-FLM",
            ModelKind::Concurrent => "concurrent",
            ModelKind::FfLinear => "FF-linear",
            ModelKind::Snn => "SNN",
            ModelKind::Fnn => "FNN",
            ModelKind::Dr => "DR",
            ModelKind::Cr => "CR",
        }
    }

    pub fn is_neural(&self) -> bool {
        matches!(self, ModelKind::Snn | ModelKind::Fnn | ModelKind::Dr | ModelKind::Cr)
    }

    pub fn supports(&self, target: Target) -> bool {
        use ModelKind::*;
        match target {
            Target::Continuous => matches!(self, FlmBasis | Fpca | KernelNp | Snn | Fnn),
            Target::Binary => matches!(self, LogisticFlm | Snn | Fnn),
            Target::Functional => matches!(self, Concurrent | FfLinear | Fnn | Dr | Cr),
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
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "flm" => Some(ModelKind::FlmBasis),
            "fpca" => Some(ModelKind::Fpca),
            "kernel" | "np" => Some(ModelKind::KernelNp),
            "logistic" => Some(ModelKind::LogisticFlm),
            "ff" | "fflinear" => Some(ModelKind::FfLinear),
            _ => None,
        };
        alias
            .or_else(|| {
                ModelKind::ALL
                    .into_iter()
                    .find(|m| m.name().to_ascii_lowercase() == key)
            })
            .ok_or_else(|| {
                let names: Vec<_> = ModelKind::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!("unknown model {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Training budget for the neural models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuralConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub widths: Widths,
}

impl NeuralConfig {
    /// The library defaults (Adam at 1e-3, batch 32, 200 epochs).
    pub fn full() -> Self {
        let t = TrainingConfig::default();
        Self {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.adam.learning_rate,
            widths: Widths::default(),
        }
    }

    /// The reduced budget used by the scalar-response tables so that a full
    /// table fits in minutes on one core: the library step and batch size,
    /// with 80 instead of 200 epochs.
    pub fn desk() -> Self {
        Self {
            epochs: 80,
            batch_size: 32,
            learning_rate: 1e-3,
            widths: Widths::default(),
        }
    }

    fn training(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..AdamConfig::default()
            },
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            ..TrainingConfig::default()
        }
    }
}

/// Hyperparameters shared by every cell of an experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub q_est: usize,
    pub q_ff: usize,
    pub fve: f64,
    pub ridge: f64,
    pub neural: NeuralConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            q_est: freg::DEFAULT_Q_EST,
            q_ff: freg::DEFAULT_Q_FF,
            fve: freg::DEFAULT_FVE,
            ridge: freg::DEFAULT_RIDGE,
            neural: NeuralConfig::desk(),
        }
    }
}

fn unsupported(model: ModelKind, target: Target) -> Error {
    Error::InvalidArgument(format!("model {model} does not handle {target:?} responses"))
}

/// Networks train in single precision; inputs are cast on the way in and
/// predictions on the way out.
fn sequences(x: &FunctionalDataset<f64>) -> Tensor<f32> {
    Tensor::sequences(x.curves()).cast()
}

fn fit_network(
    net: Network<f32>,
    x: &Tensor<f32>,
    y: &Tensor<f32>,
    x_test: &Tensor<f32>,
    cfg: &NeuralConfig,
    seed: u64,
) -> Result<Array2<f64>> {
    let outcome = train(net, x, y, &cfg.training(seed))?;
    let pred = outcome.model.predict(x_test)?.cast::<f64>();
    let n = pred.batch();
    let width = pred.item_len();
    Ok(Array2::from_shape_vec((n, width), pred.into_data()).expect("prediction shape"))
}

/// Fits `model` on continuous scalar responses and predicts `x_test`.
pub fn fit_predict_scalar(
    model: ModelKind,
    x: &FunctionalDataset<f64>,
    y: &ScalarResponses<f64>,
    x_test: &FunctionalDataset<f64>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<Array1<f64>> {
    match model {
        ModelKind::FlmBasis => freg::fit_flm_basis(x, y, cfg.q_est, cfg.ridge)?.predict(x_test),
        ModelKind::Fpca => freg::fit_flm_fpca(x, y, cfg.fve)?.predict(x_test),
        ModelKind::KernelNp => freg::fit_kernel_np(x, y)?.predict(x_test),
        ModelKind::Snn | ModelKind::Fnn => {
            let w = cfg.neural.widths;
            let net = if model == ModelKind::Snn {
                Network::snn(Head::Regression, w, seed)
            } else {
                Network::fnn(x.grid_len(), Head::Regression, w, seed)
            };
            let yt = Tensor::new(vec![y.len(), 1], y.values().iter().map(|&v| v as f32).collect())?;
            let pred = fit_network(net, &sequences(x), &yt, &sequences(x_test), &cfg.neural, seed)?;
            Ok(pred.column(0).to_owned())
        }
        other => Err(unsupported(other, Target::Continuous)),
    }
}

/// Fits `model` on 0/1 labels and returns `P(Y = 1)` for `x_test`.
pub fn fit_predict_binary(
    model: ModelKind,
    x: &FunctionalDataset<f64>,
    y: &ScalarResponses<f64>,
    x_test: &FunctionalDataset<f64>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<Array1<f64>> {
    match model {
        ModelKind::LogisticFlm => freg::fit_logistic_flm(x, y, cfg.q_est, cfg.ridge)?.predict(x_test),
        ModelKind::Snn | ModelKind::Fnn => {
            let w = cfg.neural.widths;
            let net = if model == ModelKind::Snn {
                Network::snn(Head::Binary, w, seed)
            } else {
                Network::fnn(x.grid_len(), Head::Binary, w, seed)
            };
            let onehot: Vec<f32> = y
                .values()
                .iter()
                .flat_map(|&l| if l == 1.0 { [0.0, 1.0] } else { [1.0, 0.0] })
                .collect();
            let yt = Tensor::new(vec![y.len(), 2], onehot)?;
            let pred = fit_network(net, &sequences(x), &yt, &sequences(x_test), &cfg.neural, seed)?;
            Ok(pred.column(1).mapv(|p| p.clamp(0.0, 1.0)))
        }
        other => Err(unsupported(other, Target::Binary)),
    }
}

/// Fits `model` on functional responses and predicts one curve per test row.
pub fn fit_predict_functional(
    model: ModelKind,
    x: &FunctionalDataset<f64>,
    y: &FunctionalDataset<f64>,
    x_test: &FunctionalDataset<f64>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<Array2<f64>> {
    match model {
        ModelKind::Concurrent => freg::fit_concurrent(x, y)?.predict(x_test),
        ModelKind::FfLinear => freg::fit_ff_linear(x, y, cfg.q_ff, cfg.q_ff, cfg.ridge)?.predict(x_test),
        ModelKind::Fnn | ModelKind::Dr | ModelKind::Cr => {
            let w = cfg.neural.widths;
            let (t_in, t_out) = (x.grid_len(), y.grid_len());
            let net = match model {
                ModelKind::Fnn => Network::fnn_functional(t_in, t_out, w, seed),
                ModelKind::Dr => {
                    if t_in != t_out {
                        return Err(Error::Dimension(
                            "the distributed-response network needs equal input and output grids".into(),
                        ));
                    }
                    Network::dr(w, seed)
                }
                _ => Network::cr(t_in, t_out, w, seed),
            };
            let yt = Tensor::from_array2(y.curves().mapv(|v| v as f32));
            fit_network(net, &sequences(x), &yt, &sequences(x_test), &cfg.neural, seed)
        }
        other => Err(unsupported(other, Target::Functional)),
    }
}
