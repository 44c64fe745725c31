//! A minimal sequential-network stack: tensors, dense and LSTM layers, MSE and
//! softmax cross-entropy losses, Adam, and mini-batch training.
//!
//! The four architectures used by the benchmark are built by
//! [`Network::snn`], [`Network::fnn`], [`Network::dr`] and [`Network::cr`].

mod adam;
mod dense;
pub mod gradcheck;
mod init;
mod lstm;
mod network;
pub mod serialize;
mod tensor;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{softmax_in_place, Activation, DenseLayer};
pub use lstm::{LstmLayer, LstmWeights};
pub use network::{
    loss_and_output_grad, Architecture, Gradients, Head, Layer, Loss, Network, Widths, CR_HEAD_WIDTH, DEFAULT_HIDDEN,
};
pub use tensor::Tensor;
pub use train::{train, LrSchedule, Standardizer, TrainOutcome, TrainedModel, TrainingConfig};
