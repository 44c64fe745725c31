//! Central finite-difference verification of [`Network::loss_and_grad`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::network::{Architecture, Head, Network, Widths};
use super::tensor::Tensor;
use crate::error::Result;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Pass threshold on the relative error.
pub const MAX_RELATIVE_ERROR: f64 = 1e-4;
/// Magnitude below which gradients are compared on an absolute scale; central
/// differences at `FD_STEP` carry roughly `1e-11` of rounding noise.
pub const GRADIENT_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub label: String,
    pub params_checked: usize,
    pub max_relative_error: f64,
    /// `(tensor index, entry index)` of the worst entry.
    pub worst: (usize, usize),
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= MAX_RELATIVE_ERROR
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(GRADIENT_FLOOR);
    (analytic - numeric).abs() / scale
}

/// Compares every analytic gradient entry with a central difference of the loss.
pub fn check_gradients(
    label: &str,
    net: &Network<f64>,
    x: &Tensor<f64>,
    target: &Tensor<f64>,
) -> Result<GradCheckReport> {
    let (_, grads) = net.loss_and_grad(x, target)?;
    let mut probe = net.clone();
    let mut worst = (0, 0);
    let mut max_err = 0.0f64;
    let mut checked = 0;
    for (ti, g) in grads.tensors.iter().enumerate() {
        for (k, &analytic) in g.iter().enumerate() {
            let orig = probe.params()[ti][k];
            probe.params_mut()[ti][k] = orig + FD_STEP;
            let up = probe.loss_value(x, target)?;
            probe.params_mut()[ti][k] = orig - FD_STEP;
            let down = probe.loss_value(x, target)?;
            probe.params_mut()[ti][k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = relative_error(analytic, numeric);
            if err > max_err {
                max_err = err;
                worst = (ti, k);
            }
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        label: label.to_string(),
        params_checked: checked,
        max_relative_error: max_err,
        worst,
    })
}

/// A labelled network with an input batch and matching targets.
pub type ToyCase = (String, Network<f64>, Tensor<f64>, Tensor<f64>);

/// Toy-size networks of every architecture, with all parameters jittered so
/// that no gradient path is trivially zero.
pub fn toy_networks(seq_len: usize, seed: u64) -> Vec<ToyCase> {
    let widths = Widths {
        hidden: 3,
        dense: 4,
        cr_head: 4,
    };
    let batch = 3;
    let out_len = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nets = vec![
        ("SNN".to_string(), Network::snn(Head::Regression, widths, rng.random())),
        (
            "SNN-binary".to_string(),
            Network::snn(Head::Binary, widths, rng.random()),
        ),
        (
            "FNN".to_string(),
            Network::fnn(seq_len, Head::Regression, widths, rng.random()),
        ),
        (
            "FNN-binary".to_string(),
            Network::fnn(seq_len, Head::Binary, widths, rng.random()),
        ),
        ("DR".to_string(), Network::dr(widths, rng.random())),
        ("CR".to_string(), Network::cr(seq_len, out_len, widths, rng.random())),
    ];
    nets.into_iter()
        .map(|(label, mut net)| {
            for p in net.params_mut() {
                for v in p.iter_mut() {
                    *v += rng.random_range(-0.5..0.5);
                }
            }
            let x: Vec<f64> = (0..batch * seq_len).map(|_| rng.sample(StandardNormal)).collect();
            let x = Tensor::new(vec![batch, seq_len, 1], x).expect("toy input");
            let target = match (net.architecture, net.loss) {
                (_, super::network::Loss::SoftmaxCrossEntropy) => {
                    let mut t = vec![0.0; batch * 2];
                    for b in 0..batch {
                        t[b * 2 + rng.random_range(0..2)] = 1.0;
                    }
                    Tensor::new(vec![batch, 2], t)
                }
                (Architecture::Dr, _) => Tensor::new(
                    vec![batch, seq_len],
                    (0..batch * seq_len).map(|_| rng.sample(StandardNormal)).collect(),
                ),
                (Architecture::Cr, _) => Tensor::new(
                    vec![batch, out_len],
                    (0..batch * out_len).map(|_| rng.sample(StandardNormal)).collect(),
                ),
                _ => Tensor::new(vec![batch, 1], (0..batch).map(|_| rng.sample(StandardNormal)).collect()),
            }
            .expect("toy target");
            (label, net, x, target)
        })
        .collect()
}

/// Runs [`check_gradients`] on every toy architecture for one seed.
pub fn gradcheck_suite(seq_len: usize, seed: u64) -> Result<Vec<GradCheckReport>> {
    toy_networks(seq_len, seed)
        .iter()
        .map(|(label, net, x, t)| check_gradients(label, net, x, t))
        .collect()
}
