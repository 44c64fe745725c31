use funbench_core::basis::{evaluate_basis, BasisSystem};
use funbench_core::fcurve::l2_distance;
use funbench_core::freg::{fit_kernel_np, fit_logistic_flm, ScalarPredictor};
use funbench_core::neuro::softmax_in_place;
use funbench_core::{Dataset64, Grid64, Responses64, Sample64};
use ndarray::Array2;
use proptest::prelude::*;

#[test]
fn fourier_gram_is_identity_under_quadrature() {
    let grid = Grid64::uniform(1001).unwrap();
    for q in 1..=9 {
        let phi = evaluate_basis(BasisSystem::fourier(q).unwrap(), &grid);
        let w = grid.weights();
        let gram = phi
            .values()
            .t()
            .dot(&(&phi.values() * &w.insert_axis(ndarray::Axis(1))));
        for ((j, k), &g) in gram.indexed_iter() {
            let target = if j == k { 1.0 } else { 0.0 };
            assert!((g - target).abs() <= 1e-6, "q = {q}: G[{j}, {k}] = {g}");
        }
    }
}

fn curves(values: Vec<f64>, t: usize) -> Dataset64 {
    let n = values.len() / t;
    Dataset64::new(
        Grid64::uniform(t).unwrap(),
        Array2::from_shape_vec((n, t), values).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_distance_satisfies_the_triangle_inequality(
        a in prop::collection::vec(-5.0f64..5.0, 12),
        b in prop::collection::vec(-5.0f64..5.0, 12),
        c in prop::collection::vec(-5.0f64..5.0, 12),
    ) {
        let grid = Grid64::uniform(12).unwrap();
        let (a, b, c) = (Sample64::new(a).unwrap(), Sample64::new(b).unwrap(), Sample64::new(c).unwrap());
        let ab = l2_distance(&a, &b, &grid).unwrap();
        let bc = l2_distance(&b, &c, &grid).unwrap();
        let ac = l2_distance(&a, &c, &grid).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - l2_distance(&b, &a, &grid).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn kernel_predictions_stay_within_the_training_responses(
        x in prop::collection::vec(-3.0f64..3.0, 8 * 6),
        y in prop::collection::vec(-10.0f64..10.0, 8),
        query in prop::collection::vec(-20.0f64..20.0, 3 * 6),
    ) {
        let train = curves(x, 6);
        prop_assume!(train.curves().rows().into_iter().any(|r| r != train.curve(0)));
        let model = fit_kernel_np(&train, &Responses64::continuous(y.clone()).unwrap()).unwrap();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for p in model.predict(&curves(query, 6)).unwrap() {
            prop_assert!(lo <= p && p <= hi, "{p} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn irls_objective_never_increases(
        x in prop::collection::vec(-2.0f64..2.0, 30 * 10),
        labels in prop::collection::vec(0u8..2, 30),
        ridge in prop::sample::select(vec![0.0, 1e-8, 1e-2, 1.0]),
    ) {
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let y = Responses64::binary(labels.iter().map(|&l| l as f64).collect()).unwrap();
        // separable draws may diverge without a ridge; monotonicity must hold regardless
        if let Ok(model) = fit_logistic_flm(&curves(x, 10), &y, 3, ridge) {
            let trace = &model.report.objective_trace;
            prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{trace:?}");
        }
    }

    #[test]
    fn softmax_rows_sum_to_one(logits in prop::collection::vec(-700.0f64..700.0, 1..12)) {
        let mut row = logits;
        softmax_in_place(&mut row);
        let total: f64 = row.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "{total}");
        prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }
}
