//! `funbench`: simulate functional-regression data, run the benchmark tables,
//! evaluate the real-data protocols, and check network gradients.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use funbench_core::bench::{
    emit_report, run_experiment, summarize, ExperimentPlan, ModelKind, ReportFormat, ReportTable, TableKind,
    DEFAULT_FUNCRESP_REPLICATES, DEFAULT_REAL_REPEATS, DEFAULT_REPLICATES,
};
use funbench_core::datasets::{load_aemet, load_tecator};
use funbench_core::neuro::gradcheck::{gradcheck_suite, MAX_RELATIVE_ERROR};
use funbench_core::simgen::{simulate, write_csv, SimCase, SimSpec};
use funbench_core::Error;

const DEFAULT_SEED: u64 = 2024;

#[derive(Parser, Debug)]
#[command(
    name = "funbench",
    version,
    about = "Functional regression vs. sequential networks benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one simulated dataset and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a simulation table and write its report.
    Bench(BenchArgs),
    /// Run the repeated-split protocol on a real dataset.
    Real(RealArgs),
    /// Compare analytic network gradients with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// linear, sin, bin-linear, bin-sin, CL, CNL, NCL or NCNL.
    #[arg(long)]
    case: SimCase,
    /// Number of Fourier functions in the predictors.
    #[arg(long)]
    q: usize,
    /// Grid length.
    #[arg(long = "T", default_value_t = 100)]
    grid_len: usize,
    /// Training sample size.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Test sample size.
    #[arg(long, default_value_t = 50)]
    n_test: usize,
    /// Noise standard deviation (defaults to the case's own).
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimTable {
    Scalar,
    Binary,
    Funcresp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Markdown => ReportFormat::Markdown,
        }
    }
}

/// Settings shared by `bench` and `real`.
#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Comma-separated model names; defaults to every model of the table.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Training epochs for the networks.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Worker threads; 1 runs replicates sequentially. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    table: SimTable,
    /// Replicates per cell (50, or 30 for the functional-response table).
    #[arg(long)]
    replicates: Option<usize>,
    /// Noise standard deviation for every cell (defaults to each case's own).
    #[arg(long)]
    noise_sd: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dataset {
    Tecator,
    Aemet,
}

#[derive(Args, Debug)]
struct RealArgs {
    #[arg(long, value_enum)]
    dataset: Dataset,
    /// Tecator: one CSV. Aemet: temperature CSV then precipitation CSV.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    data: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REAL_REPEATS)]
    repeats: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    /// First seed; `count` consecutive seeds are checked.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: u64,
    /// Sequence length of the toy inputs.
    #[arg(long = "T", default_value_t = 7)]
    seq_len: usize,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_data_error() {
            2
        } else if matches!(e, Error::InvalidArgument(_) | Error::Size(_)) {
            1
        } else {
            3
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Real(a) => cmd_real(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let mut spec = SimSpec::new(a.case, a.q, a.grid_len, a.n, a.n_test, a.seed);
    if let Some(sd) = a.noise_sd {
        spec.noise_sd = sd;
    }
    let data = simulate::<f64>(&spec)?;
    write_csv(&data, &a.out)?;
    eprintln!("wrote {} curves of case {} to {}", spec.n(), spec.case, a.out.display());
    Ok(())
}

fn configure(plan: &mut ExperimentPlan, run: &RunArgs) -> Result<(), Failure> {
    if let Some(models) = &run.models {
        plan.models = models.clone();
    }
    let neural = &mut plan.config.neural;
    if let Some(e) = run.epochs {
        neural.epochs = e;
    }
    if let Some(b) = run.batch_size {
        neural.batch_size = b;
    }
    if let Some(lr) = run.learning_rate {
        neural.learning_rate = lr;
    }
    if run.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    plan.parallel = run.threads != Some(1);
    Ok(())
}

fn execute(plan: &ExperimentPlan, run: &RunArgs) -> Result<ReportTable, Failure> {
    let start = Instant::now();
    let results = match run.threads {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?
            .install(|| run_experiment(plan))?,
        _ => run_experiment(plan)?,
    };
    let table = summarize(&results);
    emit_report(&table, run.format.into(), &run.out)?;
    let failed = table.rows.iter().filter(|r| r.failed()).count();
    eprintln!(
        "{} rows ({failed} failed) written to {} in {:.1}s",
        table.rows.len(),
        run.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(table)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let table = match a.table {
        SimTable::Scalar => TableKind::Scalar,
        SimTable::Binary => TableKind::Binary,
        SimTable::Funcresp => TableKind::FuncResp,
    };
    let default_reps = if table == TableKind::FuncResp {
        DEFAULT_FUNCRESP_REPLICATES
    } else {
        DEFAULT_REPLICATES
    };
    let mut plan = ExperimentPlan::for_table(table, a.replicates.unwrap_or(default_reps), a.run.seed)?;
    if let Some(sd) = a.noise_sd {
        if let funbench_core::bench::DataSource::Simulated { noise_sd, .. } = &mut plan.source {
            *noise_sd = Some(sd);
        }
    }
    configure(&mut plan, &a.run)?;
    execute(&plan, &a.run)?;
    Ok(())
}

fn one_path<'a>(paths: &'a [PathBuf], n: usize, what: &str) -> Result<&'a [PathBuf], Failure> {
    if paths.len() != n {
        return Err(usage(format!("{what} needs {n} data path(s), got {}", paths.len())));
    }
    Ok(paths)
}

fn cmd_real(a: RealArgs) -> Result<(), Failure> {
    let mut plan = match a.dataset {
        Dataset::Tecator => {
            let p = one_path(&a.data, 1, "tecator")?;
            ExperimentPlan::tecator(load_tecator(Path::new(&p[0]))?, a.repeats, a.run.seed)
        }
        Dataset::Aemet => {
            let p = one_path(&a.data, 2, "aemet")?;
            ExperimentPlan::aemet(load_aemet(&p[0], &p[1])?, a.repeats, a.run.seed)
        }
    };
    configure(&mut plan, &a.run)?;
    execute(&plan, &a.run)?;
    Ok(())
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<(), Failure> {
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for seed in a.seed..a.seed + a.count {
        for report in gradcheck_suite(a.seq_len, seed)? {
            worst = worst.max(report.max_relative_error);
            if !report.passed() {
                failed.push(format!(
                    "{} (seed {seed}): relative error {:.3e} at tensor {}, entry {}",
                    report.label, report.max_relative_error, report.worst.0, report.worst.1
                ));
            }
        }
    }
    println!(
        "gradcheck: {} seeds, worst relative error {worst:.3e} (tolerance {MAX_RELATIVE_ERROR:e})",
        a.count
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: format!("gradient mismatch:\n  {}", failed.join("\n  ")),
        })
    }
}
