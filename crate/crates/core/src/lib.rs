//! Functional regression estimators and small sequential neural networks,
//! with simulation generators, dataset loaders, and a replicated benchmark
//! harness comparing the two families.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the common `f64` instantiations.

// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bench;
pub mod datasets;
pub mod error;
pub mod fcurve;
pub mod freg;
pub mod linalg;
pub mod neuro;
pub mod rng;
pub mod scalar;
pub mod simgen;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = fcurve::Grid<f64>;
pub type Sample64 = fcurve::FunctionalSample<f64>;
pub type Dataset64 = fcurve::FunctionalDataset<f64>;
pub type Responses64 = fcurve::ScalarResponses<f64>;
pub type Coefficients64 = basis::CoefficientRepr<f64>;
pub type Tensor64 = neuro::Tensor<f64>;
pub type Network64 = neuro::Network<f64>;
pub type Network32 = neuro::Network<f32>;
pub type TecatorData64 = datasets::TecatorData<f64>;
pub type AemetData64 = datasets::AemetData<f64>;
pub type SimData64 = simgen::SimData<f64>;
