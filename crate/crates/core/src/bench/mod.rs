//! Replicated benchmark harness.
//!
//! An [`ExperimentPlan`] names a table, the settings and cases that make up
//! its cells, the models to compare and the number of replicates. Every
//! `(cell, replicate)` pair is an independent task: its data and every model's
//! training seed are derived from `(master seed, cell label, replicate)` via
//! [`crate::rng::derive_seed`], so results do not depend on execution order
//! and replicates may run in parallel.
//!
//! Simulated cells are scored against the noiseless signal (the true
//! probability for binary cells); real-data cells against observed responses.

mod metrics;
mod models;
mod report;

pub use metrics::{compute_binary_metrics, compute_mse, BinaryMetrics};
pub use models::{
    fit_predict_binary, fit_predict_functional, fit_predict_scalar, ModelConfig, ModelKind, NeuralConfig, Target,
};
pub use report::{emit_report, summarize, ReportFormat, ReportRow, ReportTable, CSV_HEADER};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::datasets::{make_splits, AemetData, SplitProtocol, TecatorData};
use crate::error::{Error, Result};
use crate::fcurve::FunctionalDataset;
use crate::rng::derive_seed;
use crate::simgen::{simulate, SimCase, SimResponse, SimSpec};

/// Desk-scale replicate count for simulation tables.
pub const DEFAULT_REPLICATES: usize = 50;
/// Replicates for the functional-response table.
pub const DEFAULT_FUNCRESP_REPLICATES: usize = 30;
/// Repeats of the real-data split protocols.
pub const DEFAULT_REAL_REPEATS: usize = 10;
/// A cell is reported as failed when more than this share of replicates fail.
pub const MAX_FAILURE_SHARE: f64 = 0.2;
/// Predictor complexity used by the functional-response table. At larger `q`
/// the concurrent sine case is dominated by rapid oscillation that no model
/// in the table learns from 200 curves.
pub const FUNCRESP_Q: usize = 5;
/// Training epochs for the networks of the binary table, trimmed from the
/// scalar table's 80 to keep a full table near ten minutes on one core.
pub const BINARY_EPOCHS: usize = 60;
/// Training epochs for the networks of the functional-response table, whose
/// bidirectional models cost about three times as much per epoch.
pub const FUNCRESP_EPOCHS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    Scalar,
    Binary,
    FuncResp,
    Tecator,
    Aemet,
}

impl TableKind {
    pub fn name(&self) -> &'static str {
        match self {
            TableKind::Scalar => "scalar",
            TableKind::Binary => "binary",
            TableKind::FuncResp => "funcresp",
            TableKind::Tecator => "tecator",
            TableKind::Aemet => "aemet",
        }
    }

    pub fn target(&self) -> Target {
        match self {
            TableKind::Scalar | TableKind::Tecator => Target::Continuous,
            TableKind::Binary => Target::Binary,
            TableKind::FuncResp | TableKind::Aemet => Target::Functional,
        }
    }

    pub fn default_models(&self) -> Vec<ModelKind> {
        use ModelKind::*;
        match self {
            TableKind::Scalar | TableKind::Tecator => vec![Snn, Fnn, FlmBasis, Fpca, KernelNp],
            TableKind::Binary => vec![Snn, Fnn, LogisticFlm],
            TableKind::FuncResp | TableKind::Aemet => vec![Dr, Cr, Fnn, FfLinear, Concurrent],
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            TableKind::Scalar,
            TableKind::Binary,
            TableKind::FuncResp,
            TableKind::Tecator,
            TableKind::Aemet,
        ]
        .into_iter()
        .find(|t| t.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| Error::InvalidArgument(format!("unknown table {s:?}")))
    }
}

/// Where a cell's data comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    /// Simulated data; `settings` are predictor complexities `q` for scalar and
    /// binary tables and grid lengths `T` for the functional-response table.
    Simulated {
        settings: Vec<usize>,
        cases: Vec<SimCase>,
        n_train: usize,
        n_test: usize,
        /// Grid length for scalar tables, or `q` for the functional-response table.
        fixed: usize,
        /// Overrides the case default when set.
        noise_sd: Option<f64>,
        coef_sd: Option<f64>,
    },
    Tecator(TecatorData<f64>),
    Aemet(AemetData<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub table: TableKind,
    pub source: DataSource,
    pub models: Vec<ModelKind>,
    pub replicates: usize,
    pub seed: u64,
    pub config: ModelConfig,
    /// Run replicates on the rayon pool; results are identical either way.
    pub parallel: bool,
}

impl ExperimentPlan {
    fn simulated(
        table: TableKind,
        settings: Vec<usize>,
        cases: Vec<SimCase>,
        fixed: usize,
        replicates: usize,
        seed: u64,
    ) -> Self {
        Self {
            table,
            source: DataSource::Simulated {
                settings,
                cases,
                n_train: 200,
                n_test: 50,
                fixed,
                noise_sd: None,
                coef_sd: None,
            },
            models: table.default_models(),
            replicates,
            seed,
            config: ModelConfig::default(),
            parallel: true,
        }
    }

    /// Continuous scalar responses: `q ∈ {5, 9, 21}` × {linear, sin}, T = 100.
    pub fn scalar(replicates: usize, seed: u64) -> Self {
        Self::simulated(
            TableKind::Scalar,
            vec![5, 9, 21],
            vec![SimCase::Linear, SimCase::Sin],
            100,
            replicates,
            seed,
        )
    }

    /// Binary responses: `q ∈ {5, 9, 21}` × {linear, sin}, T = 100, with
    /// [`BINARY_EPOCHS`] of training for the networks.
    pub fn binary(replicates: usize, seed: u64) -> Self {
        let mut plan = Self::simulated(
            TableKind::Binary,
            vec![5, 9, 21],
            vec![SimCase::BinLinear, SimCase::BinSin],
            100,
            replicates,
            seed,
        );
        plan.config.neural.epochs = BINARY_EPOCHS;
        plan
    }

    /// Functional responses: `T ∈ {100, 20}` × {CL, CNL, NCL, NCNL}, with
    /// [`FUNCRESP_EPOCHS`] of training for the networks.
    pub fn funcresp(replicates: usize, seed: u64) -> Self {
        let mut plan = Self::simulated(
            TableKind::FuncResp,
            vec![100, 20],
            vec![SimCase::Cl, SimCase::Cnl, SimCase::Ncl, SimCase::Ncnl],
            FUNCRESP_Q,
            replicates,
            seed,
        );
        plan.config.neural.epochs = FUNCRESP_EPOCHS;
        plan
    }

    pub fn for_table(table: TableKind, replicates: usize, seed: u64) -> Result<Self> {
        match table {
            TableKind::Scalar => Ok(Self::scalar(replicates, seed)),
            TableKind::Binary => Ok(Self::binary(replicates, seed)),
            TableKind::FuncResp => Ok(Self::funcresp(replicates, seed)),
            other => Err(Error::InvalidArgument(format!(
                "table {other} needs data; use the real-data constructors"
            ))),
        }
    }

    /// Tecator: 200 training and 15 test spectra per repeat.
    pub fn tecator(data: TecatorData<f64>, repeats: usize, seed: u64) -> Self {
        Self {
            table: TableKind::Tecator,
            source: DataSource::Tecator(data),
            models: TableKind::Tecator.default_models(),
            replicates: repeats,
            seed,
            config: ModelConfig::default(),
            parallel: true,
        }
    }

    /// Aemet: 65 training and 8 test stations per repeat.
    pub fn aemet(data: AemetData<f64>, repeats: usize, seed: u64) -> Self {
        Self {
            table: TableKind::Aemet,
            source: DataSource::Aemet(data),
            models: TableKind::Aemet.default_models(),
            replicates: repeats,
            seed,
            config: ModelConfig::default(),
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::InvalidArgument("plan has no models".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("plan needs at least one replicate".into()));
        }
        let target = self.table.target();
        if let Some(m) = self.models.iter().find(|m| !m.supports(target)) {
            return Err(Error::InvalidArgument(format!(
                "model {m} cannot run on the {} table",
                self.table
            )));
        }
        if let DataSource::Simulated { settings, cases, .. } = &self.source {
            if settings.is_empty() || cases.is_empty() {
                return Err(Error::InvalidArgument("plan has no cells".into()));
            }
            let wrong = cases.iter().find(|c| match target {
                Target::Continuous => c.is_binary() || c.is_functional(),
                Target::Binary => !c.is_binary(),
                Target::Functional => !c.is_functional(),
            });
            if let Some(c) = wrong {
                return Err(Error::InvalidArgument(format!(
                    "case {c} does not belong to the {} table",
                    self.table
                )));
            }
        }
        Ok(())
    }

    /// Cells in report order: cases outermost, then settings.
    pub fn cells(&self) -> Vec<CellId> {
        match &self.source {
            DataSource::Simulated { settings, cases, .. } => {
                let key = if self.table == TableKind::FuncResp { "T" } else { "q" };
                cases
                    .iter()
                    .flat_map(|c| {
                        settings.iter().map(move |&s| CellId {
                            setting: format!("{key}={s}"),
                            case: c.name().to_string(),
                            value: s,
                            sim_case: Some(*c),
                        })
                    })
                    .collect()
            }
            DataSource::Tecator(_) => vec![CellId {
                setting: "n=200/15".into(),
                case: "tecator".into(),
                value: 0,
                sim_case: None,
            }],
            DataSource::Aemet(_) => vec![CellId {
                setting: "n=65/8".into(),
                case: "aemet".into(),
                value: 0,
                sim_case: None,
            }],
        }
    }
}

/// One cell of a report: a setting (e.g. `q=9`) and a case (e.g. `linear`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellId {
    pub setting: String,
    pub case: String,
    value: usize,
    sim_case: Option<SimCase>,
}

impl CellId {
    pub fn label(&self, table: TableKind) -> String {
        format!("{}/{}/{}", table.name(), self.setting, self.case)
    }
}

/// Outcome of one model on one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateRecord {
    /// Test MSE, or the reason the model failed.
    pub error: std::result::Result<f64, String>,
    /// Test misclassification rate, binary cells only.
    pub misclassification: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub cell: CellId,
    pub model: ModelKind,
    /// One record per replicate, in replicate order.
    pub replicates: Vec<ReplicateRecord>,
}

impl RunResult {
    pub fn errors(&self) -> Vec<f64> {
        self.replicates
            .iter()
            .filter_map(|r| r.error.as_ref().ok().copied())
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.replicates.iter().filter(|r| r.error.is_err()).count()
    }
}

enum Prepared {
    Scalar {
        x: FunctionalDataset<f64>,
        y: crate::fcurve::ScalarResponses<f64>,
        x_test: FunctionalDataset<f64>,
        truth: ndarray::Array1<f64>,
        labels: Option<ndarray::Array1<f64>>,
    },
    Functional {
        x: FunctionalDataset<f64>,
        y: FunctionalDataset<f64>,
        x_test: FunctionalDataset<f64>,
        truth: ndarray::Array2<f64>,
    },
}

fn prepare(plan: &ExperimentPlan, cell: &CellId, replicate: usize, seed: u64) -> Result<Prepared> {
    match &plan.source {
        DataSource::Simulated {
            n_train,
            n_test,
            fixed,
            noise_sd,
            coef_sd,
            ..
        } => {
            let case = cell.sim_case.expect("simulated cell has a case");
            let (q, grid_len) = if case.is_functional() {
                (*fixed, cell.value)
            } else {
                (cell.value, *fixed)
            };
            let mut spec = SimSpec::new(case, q, grid_len, *n_train, *n_test, seed);
            if let Some(s) = noise_sd {
                spec.noise_sd = *s;
            }
            if let Some(s) = coef_sd {
                spec.coef_sd = *s;
            }
            let data = simulate::<f64>(&spec)?;
            let (tr, te) = (data.train_rows(), data.test_rows());
            let x = data.predictors.x.select(&tr)?;
            let x_test = data.predictors.x.select(&te)?;
            Ok(match data.response {
                SimResponse::Scalar { response, signal } => Prepared::Scalar {
                    x,
                    x_test,
                    y: response.select(&tr),
                    truth: signal.select(ndarray::Axis(0), &te),
                    labels: case.is_binary().then(|| response.select(&te).values().to_owned()),
                },
                SimResponse::Functional { response, signal } => Prepared::Functional {
                    x,
                    x_test,
                    y: response.select(&tr)?,
                    truth: signal.select(&te)?.curves().to_owned(),
                },
            })
        }
        DataSource::Tecator(d) => {
            let split = split_for(d.absorbance.n(), SplitProtocol::tecator(plan.seed), replicate)?;
            Ok(Prepared::Scalar {
                x: d.absorbance.select(&split.train)?,
                y: d.fat.select(&split.train),
                x_test: d.absorbance.select(&split.test)?,
                truth: d.fat.select(&split.test).values().to_owned(),
                labels: None,
            })
        }
        DataSource::Aemet(d) => {
            let split = split_for(d.temperature.n(), SplitProtocol::aemet(plan.seed), replicate)?;
            Ok(Prepared::Functional {
                x: d.temperature.select(&split.train)?,
                y: d.log_precip.select(&split.train)?,
                x_test: d.temperature.select(&split.test)?,
                truth: d.log_precip.select(&split.test)?.curves().to_owned(),
            })
        }
    }
}

fn split_for(n: usize, mut protocol: SplitProtocol, replicate: usize) -> Result<crate::datasets::Split> {
    protocol.repeats = replicate + 1;
    Ok(make_splits(n, &protocol)?.swap_remove(replicate))
}

fn score(plan: &ExperimentPlan, model: ModelKind, data: &Prepared, seed: u64) -> Result<(f64, Option<f64>)> {
    let cfg = &plan.config;
    match data {
        Prepared::Scalar {
            x,
            y,
            x_test,
            truth,
            labels,
        } => {
            if let Some(labels) = labels {
                let prob = fit_predict_binary(model, x, y, x_test, cfg, seed)?;
                let mse = compute_mse(prob.view(), truth.view())?;
                let m = compute_binary_metrics(prob.view(), labels.view())?;
                Ok((mse, Some(m.misclassification)))
            } else {
                let pred = fit_predict_scalar(model, x, y, x_test, cfg, seed)?;
                Ok((compute_mse(pred.view(), truth.view())?, None))
            }
        }
        Prepared::Functional { x, y, x_test, truth } => {
            let pred = fit_predict_functional(model, x, y, x_test, cfg, seed)?;
            Ok((compute_mse(pred.view(), truth.view())?, None))
        }
    }
}

fn run_task(plan: &ExperimentPlan, cell: &CellId, replicate: usize) -> Vec<ReplicateRecord> {
    let seed = derive_seed(plan.seed, &cell.label(plan.table), replicate as u64);
    let data = match prepare(plan, cell, replicate, seed) {
        Ok(d) => d,
        Err(e) => {
            let record = ReplicateRecord {
                error: Err(format!("data generation failed: {e}")),
                misclassification: None,
                seconds: 0.0,
            };
            return vec![record; plan.models.len()];
        }
    };
    plan.models
        .iter()
        .map(|&model| {
            let start = Instant::now();
            let outcome = score(plan, model, &data, derive_seed(seed, model.name(), 0));
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok((mse, misclassification)) if mse.is_finite() => ReplicateRecord {
                    error: Ok(mse),
                    misclassification,
                    seconds,
                },
                Ok((mse, _)) => ReplicateRecord {
                    error: Err(format!("non-finite test error {mse}")),
                    misclassification: None,
                    seconds,
                },
                Err(e) => ReplicateRecord {
                    error: Err(e.to_string()),
                    misclassification: None,
                    seconds,
                },
            }
        })
        .collect()
}

/// Runs every cell × replicate × model of the plan. Model failures are
/// recorded per replicate rather than aborting the run.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<RunResult>> {
    plan.validate()?;
    let cells = plan.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..plan.replicates).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Vec<ReplicateRecord>> = if plan.parallel {
        tasks.par_iter().map(|&(c, r)| run_task(plan, &cells[c], r)).collect()
    } else {
        tasks.iter().map(|&(c, r)| run_task(plan, &cells[c], r)).collect()
    };
    let mut results: Vec<RunResult> = cells
        .iter()
        .flat_map(|cell| {
            plan.models.iter().map(move |&model| RunResult {
                cell: cell.clone(),
                model,
                replicates: Vec::with_capacity(plan.replicates),
            })
        })
        .collect();
    let per_cell = plan.models.len();
    for (&(c, _), records) in tasks.iter().zip(outcomes) {
        for (m, record) in records.into_iter().enumerate() {
            results[c * per_cell + m].replicates.push(record);
        }
    }
    Ok(results)
}
