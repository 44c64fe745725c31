use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dense::{Activation, DenseCache, DenseLayer};
use super::lstm::{LstmCache, LstmLayer};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hidden width of the recurrent layers in every architecture.
pub const DEFAULT_HIDDEN: usize = 32;
/// Width of the hidden dense layer in the combined-response head.
pub const CR_HEAD_WIDTH: usize = 64;

// layers live in one short Vec per network; boxing would only add indirection
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum Layer<T> {
    Dense(DenseLayer<T>),
    /// Dense map applied independently at every timestep of `[B, T, F]`.
    TimeDistributed(DenseLayer<T>),
    Lstm(LstmLayer<T>),
    /// `[B, …] → [B, prod(…)]`.
    Flatten,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Loss {
    /// Mean over all output entries of the squared error.
    Mse,
    /// Batch mean of `-Σ y log p`; the last layer must be a softmax dense layer.
    SoftmaxCrossEntropy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// LSTM over the curve, dense head on the final hidden state.
    Snn,
    /// Two dense hidden layers over the flattened curve.
    Fnn,
    /// Bidirectional LSTM with a time-distributed linear head: one output per step.
    Dr,
    /// Bidirectional LSTM, dense hidden layer over the whole output sequence,
    /// then the full response vector.
    Cr,
    /// Hand-assembled layer stack.
    Custom,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Snn => "SNN",
            Architecture::Fnn => "FNN",
            Architecture::Dr => "DR",
            Architecture::Cr => "CR",
            Architecture::Custom => "custom",
        }
    }
}

/// Output head for scalar-response networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    /// One linear output trained with MSE.
    Regression,
    /// Two-unit softmax trained with cross-entropy; column 1 is `P(Y = 1)`.
    Binary,
}

/// Layer-size knobs shared by the architecture constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widths {
    pub hidden: usize,
    pub dense: usize,
    pub cr_head: usize,
}

impl Default for Widths {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            dense: DEFAULT_HIDDEN,
            cr_head: CR_HEAD_WIDTH,
        }
    }
}

/// Parameter gradients in [`Network::params`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub tensors: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn norm(&self) -> T {
        self.tensors
            .iter()
            .flat_map(|t| t.iter())
            .fold(T::zero(), |s, &g| s + g * g)
            .sqrt()
    }
}

enum Cache<T> {
    Dense(DenseCache<T>, Vec<usize>),
    Lstm(LstmCache<T>),
    Flatten(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub layers: Vec<Layer<T>>,
    pub loss: Loss,
    pub architecture: Architecture,
}

impl<T: Real> Network<T> {
    pub fn new(layers: Vec<Layer<T>>, loss: Loss, architecture: Architecture) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network has no layers".into()));
        }
        if loss == Loss::SoftmaxCrossEntropy {
            match layers.last() {
                Some(Layer::Dense(d)) if d.activation == Activation::Softmax => {}
                _ => {
                    return Err(Error::InvalidArgument(
                        "cross-entropy needs a final softmax dense layer".into(),
                    ))
                }
            }
        }
        Ok(Self {
            layers,
            loss,
            architecture,
        })
    }

    /// `LSTM(H, last step) → dense head`.
    pub fn snn(head: Head, widths: Widths, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = LstmLayer::new(1, widths.hidden, false, false, &mut rng);
        let (out, act, loss) = head_spec(head);
        let dense = DenseLayer::glorot(widths.hidden, out, act, &mut rng);
        Self::new(vec![Layer::Lstm(lstm), Layer::Dense(dense)], loss, Architecture::Snn).expect("valid SNN")
    }

    /// `flatten → dense(W, tanh) → dense(W, tanh) → dense head`.
    pub fn fnn(seq_len: usize, head: Head, widths: Widths, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = widths.dense;
        let (out, act, loss) = head_spec(head);
        let layers = vec![
            Layer::Flatten,
            Layer::Dense(DenseLayer::glorot(seq_len, w, Activation::Tanh, &mut rng)),
            Layer::Dense(DenseLayer::glorot(w, w, Activation::Tanh, &mut rng)),
            Layer::Dense(DenseLayer::glorot(w, out, act, &mut rng)),
        ];
        Self::new(layers, loss, Architecture::Fnn).expect("valid FNN")
    }

    /// FNN with a functional (length `out_len`) linear output.
    pub fn fnn_functional(seq_len: usize, out_len: usize, widths: Widths, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = widths.dense;
        let layers = vec![
            Layer::Flatten,
            Layer::Dense(DenseLayer::glorot(seq_len, w, Activation::Tanh, &mut rng)),
            Layer::Dense(DenseLayer::glorot(w, w, Activation::Tanh, &mut rng)),
            Layer::Dense(DenseLayer::glorot(w, out_len, Activation::Identity, &mut rng)),
        ];
        Self::new(layers, Loss::Mse, Architecture::Fnn).expect("valid FNN")
    }

    /// `BiLSTM(H, full sequence) → time-distributed linear(1) → flatten`.
    pub fn dr(widths: Widths, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = LstmLayer::new(1, widths.hidden, true, true, &mut rng);
        let td = DenseLayer::glorot(2 * widths.hidden, 1, Activation::Identity, &mut rng);
        Self::new(
            vec![Layer::Lstm(lstm), Layer::TimeDistributed(td), Layer::Flatten],
            Loss::Mse,
            Architecture::Dr,
        )
        .expect("valid DR")
    }

    /// `BiLSTM(H, full sequence) → flatten → dense(cr_head, tanh) → linear(out_len)`.
    pub fn cr(seq_len: usize, out_len: usize, widths: Widths, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = LstmLayer::new(1, widths.hidden, true, true, &mut rng);
        let flat = 2 * widths.hidden * seq_len;
        let hidden = DenseLayer::glorot(flat, widths.cr_head, Activation::Tanh, &mut rng);
        let out = DenseLayer::glorot(widths.cr_head, out_len, Activation::Identity, &mut rng);
        Self::new(
            vec![
                Layer::Lstm(lstm),
                Layer::Flatten,
                Layer::Dense(hidden),
                Layer::Dense(out),
            ],
            Loss::Mse,
            Architecture::Cr,
        )
        .expect("valid CR")
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = match layer {
                Layer::Dense(d) => d.forward(&cur)?,
                Layer::TimeDistributed(d) => {
                    require_3d(&cur)?;
                    d.forward(&cur)?
                }
                Layer::Lstm(l) => l.forward(&cur)?,
                Layer::Flatten => flatten(cur)?,
            };
        }
        Ok(cur)
    }

    fn forward_cached(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<Cache<T>>)> {
        let mut cur = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let in_shape = cur.shape().to_vec();
            cur = match layer {
                Layer::Dense(d) | Layer::TimeDistributed(d) => {
                    if matches!(layer, Layer::TimeDistributed(_)) {
                        require_3d(&cur)?;
                    }
                    let (y, c) = d.forward_cached(&cur)?;
                    caches.push(Cache::Dense(c, in_shape));
                    y
                }
                Layer::Lstm(l) => {
                    let (y, c) = l.forward_cached(&cur)?;
                    caches.push(Cache::Lstm(c));
                    y
                }
                Layer::Flatten => {
                    caches.push(Cache::Flatten(in_shape));
                    flatten(cur)?
                }
            };
        }
        Ok((cur, caches))
    }

    /// Loss value on a batch.
    pub fn loss_value(&self, x: &Tensor<T>, target: &Tensor<T>) -> Result<T> {
        let out = self.forward(x)?;
        loss_and_output_grad(self.loss, &out, target).map(|(l, _)| l)
    }

    /// Loss and exact parameter gradients by reverse-mode accumulation,
    /// including backpropagation through time for recurrent layers.
    pub fn loss_and_grad(&self, x: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Gradients<T>)> {
        let (out, caches) = self.forward_cached(x)?;
        let (loss, mut grad) = loss_and_output_grad(self.loss, &out, target)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss".into()));
        }
        let mut per_layer: Vec<Vec<Vec<T>>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (idx, (layer, cache)) in self.layers.iter().zip(caches.iter()).enumerate().rev() {
            let (dx, g) = match (layer, cache) {
                (Layer::Dense(d) | Layer::TimeDistributed(d), Cache::Dense(c, in_shape)) => {
                    // softmax + cross-entropy: the loss already returned d/dlogits
                    let at_logits = idx == last && self.loss == Loss::SoftmaxCrossEntropy;
                    let (dx, [dw, db]) = d.backward(c, &grad, in_shape, at_logits)?;
                    (dx, vec![dw, db])
                }
                (Layer::Lstm(l), Cache::Lstm(c)) => l.backward(c, &grad)?,
                (Layer::Flatten, Cache::Flatten(in_shape)) => (grad.reshape(in_shape.clone())?, vec![]),
                _ => unreachable!("cache kinds follow the layer list"),
            };
            per_layer.push(g);
            grad = dx;
        }
        per_layer.reverse();
        Ok((
            loss,
            Gradients {
                tensors: per_layer.into_iter().flatten().collect(),
            },
        ))
    }

    /// Parameter tensors as flat row-major slices, in a fixed order:
    /// per layer, dense `[weights, bias]`, LSTM `[w_x, w_h, bias]` per direction.
    pub fn params(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) | Layer::TimeDistributed(d) => {
                    out.push(d.weights.as_slice().expect("standard layout"));
                    out.push(d.bias.as_slice().expect("standard layout"));
                }
                Layer::Lstm(l) => {
                    for w in std::iter::once(&l.forward).chain(l.backward.iter()) {
                        out.push(w.w_x.as_slice().expect("standard layout"));
                        out.push(w.w_h.as_slice().expect("standard layout"));
                        out.push(w.bias.as_slice().expect("standard layout"));
                    }
                }
                Layer::Flatten => {}
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) | Layer::TimeDistributed(d) => {
                    out.push(d.weights.as_slice_mut().expect("standard layout"));
                    out.push(d.bias.as_slice_mut().expect("standard layout"));
                }
                Layer::Lstm(l) => {
                    for w in std::iter::once(&mut l.forward).chain(l.backward.as_mut()) {
                        out.push(w.w_x.as_slice_mut().expect("standard layout"));
                        out.push(w.w_h.as_slice_mut().expect("standard layout"));
                        out.push(w.bias.as_slice_mut().expect("standard layout"));
                    }
                }
                Layer::Flatten => {}
            }
        }
        out
    }

    /// `(rows, cols)` of every parameter tensor; biases are `(1, len)`.
    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) | Layer::TimeDistributed(d) => {
                    out.push(d.weights.dim());
                    out.push((1, d.bias.len()));
                }
                Layer::Lstm(l) => {
                    for w in std::iter::once(&l.forward).chain(l.backward.iter()) {
                        out.push(w.w_x.dim());
                        out.push(w.w_h.dim());
                        out.push((1, w.bias.len()));
                    }
                }
                Layer::Flatten => {}
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Same network in another scalar type.
    pub fn cast<U: Real>(&self) -> Network<U> {
        let mut out = Network {
            layers: self.layers.iter().map(cast_layer_shape).collect(),
            loss: self.loss,
            architecture: self.architecture,
        };
        for (dst, src) in out.params_mut().into_iter().zip(self.params()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = U::lit(s.to_f64_lossy());
            }
        }
        out
    }
}

fn cast_layer_shape<T: Real, U: Real>(layer: &Layer<T>) -> Layer<U> {
    use super::lstm::LstmWeights;
    let dense = |d: &DenseLayer<T>| DenseLayer::<U>::zeros(d.d_in(), d.d_out(), d.activation);
    match layer {
        Layer::Dense(d) => Layer::Dense(dense(d)),
        Layer::TimeDistributed(d) => Layer::TimeDistributed(dense(d)),
        Layer::Lstm(l) => Layer::Lstm(LstmLayer {
            forward: LstmWeights::zeros(l.input_dim(), l.hidden()),
            backward: l
                .backward
                .as_ref()
                .map(|_| LstmWeights::zeros(l.input_dim(), l.hidden())),
            return_sequences: l.return_sequences,
        }),
        Layer::Flatten => Layer::Flatten,
    }
}

fn head_spec(head: Head) -> (usize, Activation, Loss) {
    match head {
        Head::Regression => (1, Activation::Identity, Loss::Mse),
        Head::Binary => (2, Activation::Softmax, Loss::SoftmaxCrossEntropy),
    }
}

fn require_3d<T: Real>(x: &Tensor<T>) -> Result<()> {
    if x.ndim() != 3 {
        return Err(Error::Dimension(format!(
            "time-distributed layer expects [batch, time, features], got {:?}",
            x.shape()
        )));
    }
    Ok(())
}

fn flatten<T: Real>(x: Tensor<T>) -> Result<Tensor<T>> {
    let b = x.batch();
    let rest = x.item_len();
    x.reshape(vec![b, rest])
}

/// Loss on a batch and its gradient with respect to the network output (for
/// cross-entropy: with respect to the logits of the final softmax layer).
pub fn loss_and_output_grad<T: Real>(loss: Loss, out: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    if out.data().len() != target.data().len() || out.batch() != target.batch() {
        return Err(Error::Dimension(format!(
            "output {:?} and target {:?} differ",
            out.shape(),
            target.shape()
        )));
    }
    match loss {
        Loss::Mse => {
            let m = T::from_usize_lossy(out.data().len());
            let mut grad = out.clone();
            let mut sse = T::zero();
            for (g, &t) in grad.data_mut().iter_mut().zip(target.data()) {
                let e = *g - t;
                sse += e * e;
                *g = T::lit(2.0) * e / m;
            }
            Ok((sse / m, grad))
        }
        Loss::SoftmaxCrossEntropy => {
            let b = T::from_usize_lossy(out.batch());
            let tiny = T::min_positive_value();
            let mut grad = out.clone();
            let mut nll = T::zero();
            for (g, &t) in grad.data_mut().iter_mut().zip(target.data()) {
                if t > T::zero() {
                    nll -= t * g.max(tiny).ln();
                }
                *g = (*g - t) / b;
            }
            Ok((nll / b, grad))
        }
    }
}
