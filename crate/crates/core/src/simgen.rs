//! Simulation generators for scalar, binary and functional responses.
//!
//! Predictor curves are random Fourier expansions
//! `X_i(t) = Σ_{k=1}^{q} x_{ik} φ_k(t)` with i.i.d. `x_{ik} ~ N(0, coef_sd²)`.
//! Because the basis is orthonormal, every integral against a Fourier-expanded
//! parameter function is computed exactly from the scores rather than by
//! quadrature:
//!
//! * `∫ X_i β = Σ_k x_{ik} / k` for `β = Σ_k φ_k / k`;
//! * `∫ α(t, s) X_i(s) ds = β₁(t) Σ_k x_{ik} (q − k + 1) / q` for
//!   `α(t, s) = β₁(t) β₂(s)`, `β₁ = Σ_k (k/q) φ_k`, `β₂ = Σ_k ((q−k+1)/q) φ_k`.
//!
//! Each generator draws from its own stream of [`crate::rng`] keyed by the
//! spec seed, so outputs depend only on the spec.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::{evaluate_basis, BasisSystem};
use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, Grid, ScalarResponses};
use crate::rng;
use crate::scalar::{expit, Real};

/// Default sd of the predictor scores.
pub const DEFAULT_COEF_SD: f64 = 0.5;
/// Default observation-noise sd for scalar responses.
pub const DEFAULT_SCALAR_NOISE_SD: f64 = 0.5;
/// Default observation-noise sd for functional responses.
pub const DEFAULT_FUNCTIONAL_NOISE_SD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimCase {
    /// `Y = ∫Xβ + e`.
    Linear,
    /// `Y = sin(∫Xβ) + e`.
    Sin,
    /// `P(Y = 1) = expit(∫Xβ)`.
    BinLinear,
    /// `P(Y = 1) = expit(sin ∫Xβ)`.
    BinSin,
    /// Concurrent linear: `Y(t) = β(t) X(t) + e(t)`.
    Cl,
    /// Concurrent non-linear: `Y(t) = sin(β(t) X(t)) + e(t)`.
    Cnl,
    /// Non-concurrent linear: `Y(t) = ∫ α(t, s) X(s) ds + e(t)`.
    Ncl,
    /// Non-concurrent non-linear: sine of the NCL integral plus noise.
    Ncnl,
}

impl SimCase {
    pub const ALL: [SimCase; 8] = [
        SimCase::Linear,
        SimCase::Sin,
        SimCase::BinLinear,
        SimCase::BinSin,
        SimCase::Cl,
        SimCase::Cnl,
        SimCase::Ncl,
        SimCase::Ncnl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SimCase::Linear => "linear",
            SimCase::Sin => "sin",
            SimCase::BinLinear => "bin-linear",
            SimCase::BinSin => "bin-sin",
            SimCase::Cl => "CL",
            SimCase::Cnl => "CNL",
            SimCase::Ncl => "NCL",
            SimCase::Ncnl => "NCNL",
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, SimCase::BinLinear | SimCase::BinSin)
    }

    pub fn is_functional(&self) -> bool {
        matches!(self, SimCase::Cl | SimCase::Cnl | SimCase::Ncl | SimCase::Ncnl)
    }

    pub fn default_noise_sd(&self) -> f64 {
        if self.is_functional() {
            DEFAULT_FUNCTIONAL_NOISE_SD
        } else {
            DEFAULT_SCALAR_NOISE_SD
        }
    }
}

impl fmt::Display for SimCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s) || c.name().replace('-', "_").eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = SimCase::ALL.iter().map(|c| c.name()).collect();
                Error::InvalidArgument(format!("unknown case {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Everything a generator needs; a pure description of one simulated dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSpec {
    pub case: SimCase,
    /// Number of Fourier functions in the predictors (data complexity).
    pub q: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub grid_len: usize,
    pub coef_sd: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SimSpec {
    /// A spec with the default score and noise scales for `case`.
    pub fn new(case: SimCase, q: usize, grid_len: usize, n_train: usize, n_test: usize, seed: u64) -> Self {
        Self {
            case,
            q,
            n_train,
            n_test,
            grid_len,
            coef_sd: DEFAULT_COEF_SD,
            noise_sd: case.default_noise_sd(),
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.n_train + self.n_test
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        if self.grid_len < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidArgument("sample sizes must be at least 1".into()));
        }
        for (name, v) in [("coef_sd", self.coef_sd), ("noise_sd", self.noise_sd)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Predictor curves together with the scores that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictors<T> {
    pub x: FunctionalDataset<T>,
    /// `n × q` Fourier scores `x_{ik}`.
    pub scores: Array2<T>,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum SimResponse<T> {
    /// Continuous or binary responses; `signal` is the noiseless mean
    /// (`P(Y = 1)` for binary cases).
    Scalar {
        response: ScalarResponses<T>,
        signal: Array1<T>,
    },
    Functional {
        response: FunctionalDataset<T>,
        signal: FunctionalDataset<T>,
    },
}

/// One simulated dataset: the first `n_train` rows are for training.
#[derive(Clone, Debug, PartialEq)]
pub struct SimData<T> {
    pub spec: SimSpec,
    pub predictors: Predictors<T>,
    pub response: SimResponse<T>,
}

impl<T: Real> SimData<T> {
    pub fn train_rows(&self) -> Vec<usize> {
        (0..self.spec.n_train).collect()
    }

    pub fn test_rows(&self) -> Vec<usize> {
        (self.spec.n_train..self.spec.n()).collect()
    }
}

fn normal_draws<T: Real, R: Rng>(rng: &mut R, shape: (usize, usize), sd: f64) -> Array2<T> {
    Array2::from_shape_simple_fn(shape, || {
        let z: f64 = rng.sample(StandardNormal);
        T::lit(sd * z)
    })
}

/// Random Fourier curves on a uniform grid of `spec.grid_len` points.
pub fn gen_predictors<T: Real>(spec: &SimSpec) -> Result<Predictors<T>> {
    spec.validate()?;
    let grid = Grid::uniform(spec.grid_len)?;
    let mut rng = rng::stream(spec.seed, "scores", 0);
    let scores: Array2<T> = normal_draws(&mut rng, (spec.n(), spec.q), spec.coef_sd);
    let phi = evaluate_basis(BasisSystem::fourier(spec.q)?, &grid);
    let curves = scores.dot(&phi.values().t());
    Ok(Predictors {
        x: FunctionalDataset::new(grid, curves)?,
        scores,
    })
}

fn check_scores<T: Real>(p: &Predictors<T>, spec: &SimSpec) -> Result<()> {
    if p.scores.ncols() != spec.q {
        return Err(Error::Dimension(format!(
            "predictors have {} scores per curve but the spec has q = {}",
            p.scores.ncols(),
            spec.q
        )));
    }
    if p.scores.nrows() != p.x.n() {
        return Err(Error::Dimension("scores and curves disagree on sample count".into()));
    }
    Ok(())
}

/// `∫ X_i β` for `β = Σ φ_k / k`, evaluated exactly from the scores.
pub fn linear_functional<T: Real>(scores: &Array2<T>) -> Array1<T> {
    let w = Array1::from_shape_fn(scores.ncols(), |k| T::one() / T::from_usize_lossy(k + 1));
    scores.dot(&w)
}

/// `β(t) = Σ_{k=1}^{q} φ_k(t) / k` on the grid.
pub fn beta_curve<T: Real>(q: usize, grid: &Grid<T>) -> Result<Array1<T>> {
    weighted_fourier(q, grid, |k| T::one() / T::from_usize_lossy(k))
}

/// `β₁(t) = Σ_k (k/q) φ_k(t)`.
pub fn beta1_curve<T: Real>(q: usize, grid: &Grid<T>) -> Result<Array1<T>> {
    let qf = T::from_usize_lossy(q);
    weighted_fourier(q, grid, |k| T::from_usize_lossy(k) / qf)
}

/// `β₂(s) = Σ_k ((q − k + 1)/q) φ_k(s)`.
pub fn beta2_curve<T: Real>(q: usize, grid: &Grid<T>) -> Result<Array1<T>> {
    let qf = T::from_usize_lossy(q);
    weighted_fourier(q, grid, |k| T::from_usize_lossy(q - k + 1) / qf)
}

fn weighted_fourier<T: Real>(q: usize, grid: &Grid<T>, w: impl Fn(usize) -> T) -> Result<Array1<T>> {
    let phi = evaluate_basis(BasisSystem::fourier(q)?, grid);
    let weights = Array1::from_shape_fn(q, |k| w(k + 1));
    Ok(phi.values().dot(&weights))
}

/// Continuous responses for the `Linear` and `Sin` cases, and the noiseless signal.
pub fn gen_scalar_response<T: Real>(p: &Predictors<T>, spec: &SimSpec) -> Result<(ScalarResponses<T>, Array1<T>)> {
    check_scores(p, spec)?;
    let eta = linear_functional(&p.scores);
    let signal = match spec.case {
        SimCase::Linear => eta,
        SimCase::Sin => eta.mapv(|v| v.sin()),
        other => {
            return Err(Error::InvalidArgument(format!(
                "case {other} does not have a continuous scalar response"
            )))
        }
    };
    let mut rng = rng::stream(spec.seed, "noise", 0);
    let noise: Array2<T> = normal_draws(&mut rng, (signal.len(), 1), spec.noise_sd);
    let y = &signal + &noise.column(0);
    Ok((
        ScalarResponses::new(y, crate::fcurve::ResponseKind::Continuous)?,
        signal,
    ))
}

/// Bernoulli labels for `BinLinear` / `BinSin`, and the true probabilities.
pub fn gen_binary_response<T: Real>(p: &Predictors<T>, spec: &SimSpec) -> Result<(ScalarResponses<T>, Array1<T>)> {
    check_scores(p, spec)?;
    let eta = linear_functional(&p.scores);
    let logit = match spec.case {
        SimCase::BinLinear => eta,
        SimCase::BinSin => eta.mapv(|v| v.sin()),
        other => return Err(Error::InvalidArgument(format!("case {other} is not a binary case"))),
    };
    labels_from_logits(&logit, spec.seed)
}

/// Draws `Y_i ~ Bernoulli(expit(logit_i))` from the spec's label stream.
pub fn labels_from_logits<T: Real>(logit: &Array1<T>, seed: u64) -> Result<(ScalarResponses<T>, Array1<T>)> {
    let prob = logit.mapv(expit);
    let mut rng = rng::stream(seed, "labels", 0);
    let labels: Vec<T> = prob
        .iter()
        .map(|&p| {
            let u: f64 = rng.random();
            if u < p.to_f64_lossy() {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok((ScalarResponses::binary(labels)?, prob))
}

/// Functional responses for the four function-on-function cases.
pub fn gen_functional_response<T: Real>(
    p: &Predictors<T>,
    spec: &SimSpec,
) -> Result<(FunctionalDataset<T>, FunctionalDataset<T>)> {
    check_scores(p, spec)?;
    let grid = p.x.grid();
    if grid.len() != spec.grid_len {
        return Err(Error::Dimension(format!(
            "predictor grid has {} points, spec has {}",
            grid.len(),
            spec.grid_len
        )));
    }
    let signal = match spec.case {
        SimCase::Cl | SimCase::Cnl => {
            let beta = beta_curve(spec.q, grid)?;
            let mut s = p.x.curves() * &beta;
            if spec.case == SimCase::Cnl {
                s.mapv_inplace(|v| v.sin());
            }
            s
        }
        SimCase::Ncl | SimCase::Ncnl => {
            let qf = T::from_usize_lossy(spec.q);
            let w = Array1::from_shape_fn(spec.q, |k| T::from_usize_lossy(spec.q - k) / qf);
            let proj = p.scores.dot(&w);
            let beta1 = beta1_curve(spec.q, grid)?;
            let mut s = Array2::from_shape_fn((p.x.n(), grid.len()), |(i, j)| proj[i] * beta1[j]);
            if spec.case == SimCase::Ncnl {
                s.mapv_inplace(|v| v.sin());
            }
            s
        }
        other => return Err(Error::InvalidArgument(format!("case {other} is not a functional case"))),
    };
    let mut rng = rng::stream(spec.seed, "noise", 0);
    let noise: Array2<T> = normal_draws(&mut rng, signal.dim(), spec.noise_sd);
    let mut y = signal.clone();
    Zip::from(&mut y).and(&noise).for_each(|a, &e| *a += e);
    Ok((
        FunctionalDataset::new(grid.clone(), y)?,
        FunctionalDataset::new(grid.clone(), signal)?,
    ))
}

/// Predictors and responses for `spec.case`.
pub fn simulate<T: Real>(spec: &SimSpec) -> Result<SimData<T>> {
    let predictors = gen_predictors(spec)?;
    let response = if spec.case.is_functional() {
        let (response, signal) = gen_functional_response(&predictors, spec)?;
        SimResponse::Functional { response, signal }
    } else if spec.case.is_binary() {
        let (response, signal) = gen_binary_response(&predictors, spec)?;
        SimResponse::Scalar { response, signal }
    } else {
        let (response, signal) = gen_scalar_response(&predictors, spec)?;
        SimResponse::Scalar { response, signal }
    };
    Ok(SimData {
        spec: *spec,
        predictors,
        response,
    })
}

/// Writes a simulated dataset as CSV: a `split` column (`train`/`test`), the
/// predictor values `x1..xT`, then either `y,signal` or `y1..yT,s1..sT`.
pub fn write_csv<T: Real>(data: &SimData<T>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    let t = data.predictors.x.grid_len();
    let mut header = vec!["split".to_string()];
    header.extend((1..=t).map(|j| format!("x{j}")));
    match &data.response {
        SimResponse::Scalar { .. } => header.extend(["y".to_string(), "signal".to_string()]),
        SimResponse::Functional { response, .. } => {
            let r = response.grid_len();
            header.extend((1..=r).map(|j| format!("y{j}")));
            header.extend((1..=r).map(|j| format!("s{j}")));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    let fmt = |v: T| format!("{:e}", v.to_f64_lossy());
    for i in 0..data.predictors.x.n() {
        let mut row = vec![if i < data.spec.n_train { "train" } else { "test" }.to_string()];
        row.extend(data.predictors.x.curve(i).iter().map(|&v| fmt(v)));
        match &data.response {
            SimResponse::Scalar { response, signal } => {
                row.push(fmt(response.values()[i]));
                row.push(fmt(signal[i]));
            }
            SimResponse::Functional { response, signal } => {
                row.extend(response.curve(i).iter().map(|&v| fmt(v)));
                row.extend(signal.curve(i).iter().map(|&v| fmt(v)));
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}
