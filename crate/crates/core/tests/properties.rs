use invfilter_core::diagonal::DiagonalModel;
use invfilter_core::experiments::{diagonal_minimax, MinimaxSpec};
use invfilter_core::filters::{kalman_cov_closed_form, product_operator_spectrum, threedvar_gain, FilterState};
use invfilter_core::par::Execution;
use proptest::collection::vec;
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = DiagonalModel> {
    (1usize..40).prop_flat_map(|m| {
        (vec(1e-3f64..10.0, m), vec(1e-3f64..10.0, m)).prop_map(|(k, l)| DiagonalModel::new(k, l).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kalman_covariance_is_non_increasing(model in model_strategy(), alpha in 0.01f64..100.0, gamma in 0.01f64..10.0, steps in 1usize..60) {
        let m = model.len();
        let mut f = FilterState::kalman(&model, alpha, gamma, vec![0.0; m]).unwrap();
        let mut prev = f.cov_spectrum().to_vec();
        for _ in 0..steps {
            f.advance(&vec![0.0; m]).unwrap();
            for (c, p) in f.cov_spectrum().iter().zip(&prev) {
                prop_assert!(*c <= *p * (1.0 + 1e-14));
                prop_assert!(*c > 0.0);
            }
            prev = f.cov_spectrum().to_vec();
        }
        let closed = kalman_cov_closed_form(&model, alpha, gamma, steps);
        for (c, w) in prev.iter().zip(&closed) {
            prop_assert!((c - w).abs() <= 1e-10 * w);
        }
    }

    #[test]
    fn threedvar_contraction_in_unit_interval(model in model_strategy(), alpha in 1e-3f64..1e3) {
        let gain = threedvar_gain(&model, alpha).unwrap();
        for (g, k) in gain.iter().zip(model.kappa()) {
            let gk = g * k;
            prop_assert!((0.0..1.0).contains(&gk));
        }
    }

    #[test]
    fn noiseless_kalman_mean_matches_product_operator(model in model_strategy(), alpha in 0.1f64..10.0, steps in 1usize..40) {
        // y = A u for u = 1 leaves m_n − u = (product operator)(m₀ − u)
        let m = model.len();
        let truth = vec![1.0; m];
        let y: Vec<f64> = model.kappa().to_vec();
        let mut f = FilterState::kalman(&model, alpha, 1.0, vec![0.0; m]).unwrap();
        for _ in 0..steps {
            f.advance(&y).unwrap();
        }
        let r = product_operator_spectrum(&model, alpha, steps);
        for ((mn, u), ri) in f.mean().iter().zip(&truth).zip(&r) {
            prop_assert!((u - mn - ri).abs() <= 1e-10 * (1.0 + ri.abs()));
        }
    }
}

#[test]
fn sequential_and_parallel_are_bit_identical() {
    let spec = MinimaxSpec { modes: 200, ..MinimaxSpec::default() };
    let ns = [16, 32, 64, 128];
    let a = diagonal_minimax(&spec, &ns, 12, Execution::Sequential).unwrap();
    let b = diagonal_minimax(&spec, &ns, 12, Execution::Parallel).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.mse.to_bits(), y.mse.to_bits());
        assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
    }
    assert_eq!(a.fit.slope.to_bits(), b.fit.slope.to_bits());
}
