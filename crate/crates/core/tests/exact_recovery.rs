//! Noiseless, correctly specified data must be recovered to rounding error.

use funbench_core::bench::{compute_mse, run_experiment, DataSource, ExperimentPlan, ModelKind};
use funbench_core::freg::{fit_concurrent, fit_ff_linear, fit_flm_basis, FunctionalPredictor, ScalarPredictor};
use funbench_core::simgen::{simulate, SimCase, SimResponse, SimSpec};
use funbench_core::SimData64;

fn noiseless(case: SimCase, q: usize, t: usize, seed: u64) -> SimData64 {
    let mut spec = SimSpec::new(case, q, t, 200, 50, seed);
    spec.noise_sd = 0.0;
    simulate(&spec).unwrap()
}

#[test]
fn basis_flm_recovers_the_linear_case() {
    for seed in [1, 2, 3] {
        let d = noiseless(SimCase::Linear, 5, 100, seed);
        let SimResponse::Scalar { response, signal } = &d.response else {
            unreachable!()
        };
        let (tr, te) = (d.train_rows(), d.test_rows());
        let model = fit_flm_basis(&d.predictors.x.select(&tr).unwrap(), &response.select(&tr), 5, 0.0).unwrap();
        let pred = model.predict(&d.predictors.x.select(&te).unwrap()).unwrap();
        let truth = signal.select(ndarray::Axis(0), &te);
        let mse = compute_mse(pred.view(), truth.view()).unwrap();
        assert!(mse < 1e-10, "seed {seed}: {mse:e}");
    }
}

fn functional_mse(case: SimCase, fit: impl Fn(&SimData64, &[usize], &[usize]) -> ndarray::Array2<f64>) -> f64 {
    let d = noiseless(case, 5, 100, 11);
    let SimResponse::Functional { signal, .. } = &d.response else {
        unreachable!()
    };
    let (tr, te) = (d.train_rows(), d.test_rows());
    let pred = fit(&d, &tr, &te);
    let truth = signal.select(&te).unwrap();
    compute_mse(pred.view(), truth.curves().view()).unwrap()
}

fn parts(d: &SimData64, rows: &[usize]) -> (funbench_core::Dataset64, funbench_core::Dataset64) {
    let SimResponse::Functional { response, .. } = &d.response else {
        unreachable!()
    };
    (d.predictors.x.select(rows).unwrap(), response.select(rows).unwrap())
}

#[test]
fn concurrent_model_recovers_the_concurrent_linear_case() {
    let mse = functional_mse(SimCase::Cl, |d, tr, te| {
        let (x, y) = parts(d, tr);
        fit_concurrent(&x, &y).unwrap().predict(&parts(d, te).0).unwrap()
    });
    assert!(mse < 1e-10, "{mse:e}");
}

#[test]
fn ff_linear_recovers_the_non_concurrent_linear_case() {
    let mse = functional_mse(SimCase::Ncl, |d, tr, te| {
        let (x, y) = parts(d, tr);
        fit_ff_linear(&x, &y, 5, 5, 0.0)
            .unwrap()
            .predict(&parts(d, te).0)
            .unwrap()
    });
    assert!(mse < 1e-8, "{mse:e}");
}

#[test]
fn harness_reports_exact_recovery_for_the_linear_cell() {
    let mut plan = ExperimentPlan::scalar(3, 17);
    plan.source = DataSource::Simulated {
        settings: vec![5],
        cases: vec![SimCase::Linear],
        n_train: 200,
        n_test: 50,
        fixed: 100,
        noise_sd: Some(0.0),
        coef_sd: None,
    };
    plan.models = vec![ModelKind::FlmBasis];
    plan.config.q_est = 5;
    plan.config.ridge = 0.0;
    let results = run_experiment(&plan).unwrap();
    let errors = results[0].errors();
    assert_eq!(errors.len(), 3);
    assert!(errors.iter().all(|&e| (0.0..1e-10).contains(&e)), "{errors:?}");
}
