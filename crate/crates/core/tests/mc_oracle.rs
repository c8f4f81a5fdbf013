use cvmono::mc::{empirical_conditional_variance, sample_wigner, validate_against_state};
use cvmono::network::{build_circuit, CircuitParams, MODE_A, MODE_B, MODE_C};
use cvmono::{GaussianState, Quadrature};

#[test]
fn circuit_sampling_agrees_with_schur_complements() {
    let state = build_circuit(&CircuitParams::new(1.0, 0.5)).unwrap();
    let report = validate_against_state(&state, (MODE_B, MODE_A, MODE_C), 1_000_000, 7, 3.0).unwrap();
    for row in &report.rows {
        assert!((row.regression.value / row.exact - 1.0).abs() < 0.01, "{row:?}");
        if let Some(b) = row.binned {
            assert!((b.value / row.exact - 1.0).abs() < 0.03, "{row:?}");
        }
    }
    assert!(report.checks.iter().all(|c| c.passed), "{:?}", report.checks);
    let s = report.rows.iter().find(|r| r.quantity == "S_coll").unwrap();
    assert!((s.regression.value * 2f64.cosh() - 1.0).abs() < 0.02);
    assert!(report.max_abs_z() < 5.0);
}

#[test]
fn coarse_bins_only_bias_upwards() {
    // Fixed bin counts leave a positive bias that grows with the
    // correlation strength; the regression estimate stays unbiased.
    let tms = GaussianState::two_mode_squeezed(1.0).unwrap();
    let batch = sample_wigner(&tms, 1_000_000, 11).unwrap();
    let exact = 1.0 / 2f64.cosh();
    let est = empirical_conditional_variance(&batch, Quadrature::x(0), &[Quadrature::x(1)], Some(50)).unwrap();
    assert!(est.binned.value >= exact - 3.0 * est.binned.se);
    assert!((est.regression.value / exact - 1.0).abs() < 0.02);

    let split = build_circuit(&CircuitParams::new(1.0, 0.5)).unwrap();
    let batch = sample_wigner(&split, 1_000_000, 12).unwrap();
    let conds = [Quadrature::x(MODE_A), Quadrature::x(MODE_C)];
    let exact = split.conditional_variance(Quadrature::x(MODE_B), &conds).unwrap();
    let est = empirical_conditional_variance(&batch, Quadrature::x(MODE_B), &conds, Some(20)).unwrap();
    assert_eq!(est.bins_per_conditioner, 20);
    assert!(est.binned.value >= exact - 3.0 * est.binned.se);
    assert!((est.regression.value / exact - 1.0).abs() < 0.03);
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let state = build_circuit(&CircuitParams::new(0.7, 0.3)).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_wigner(&state, 300_000, 99).unwrap())
    };
    assert_eq!(run(1).data(), run(4).data());
}
