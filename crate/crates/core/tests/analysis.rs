use butterfly::analysis::{
    envelope_rows, error_envelope, inclusion_statistics, iterated_reinterpolation_experiment,
    kernel_butterfly_error, q_hat_scan, read_envelope_csv, solve_rho1, stability_constant_c1,
    verify_inclusion, write_envelope_csv, ButterflyGeometry, ExperimentOptions, HalvingModel,
    StabilityBudget,
};
use butterfly::interp::Interval;
use butterfly::kernel::{FnKernel, Helmholtz};
use butterfly::Complex64;

fn opts(trials: usize) -> ExperimentOptions {
    ExperimentOptions {
        trials,
        samples: 32,
        norm_samples: 256,
        seed: 3,
    }
}

#[test]
fn rho1_examples() {
    assert!((solve_rho1(2.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    let r = solve_rho1(2.0, 0.5).unwrap();
    assert!((r - 1.6403882).abs() < 1e-7, "{r}");
    let half = Interval::new(0.0, 1.0).unwrap();
    assert!(verify_inclusion(2.0, &half, r));
    assert!(!verify_inclusion(2.0, &half, 0.99 * r));
    let left = Interval::new(-1.0, 0.0).unwrap();
    assert!(verify_inclusion(2.0, &left, r));
    // an interior subinterval fits into a smaller ellipse
    let mid = Interval::new(-0.5, 0.5).unwrap();
    assert!(verify_inclusion(2.0, &mid, r));
    assert!(solve_rho1(1.0, 0.5).is_err());
    assert!(solve_rho1(2.0, 0.0).is_err());
}

#[test]
fn inclusion_statistics_are_sharp() {
    let s = inclusion_statistics(50, 5e-3, 9).unwrap();
    assert_eq!(s.included, 50);
    assert_eq!(s.broken_by_shrink, 50);
    assert!(s.max_ratio <= 1.0);
}

#[test]
fn q_hat_tends_to_h() {
    for h in [0.25, 0.5] {
        let q = q_hat_scan(h, 1e3, 1e6, 50).unwrap();
        assert!(q >= h && q < h * 1.01, "{h}: {q}");
    }
}

#[test]
fn budget_constants() {
    let b = StabilityBudget::new(1.0, 2.0, 3, 1, 4, 1.0).unwrap();
    let want = 2.0 / 1.0 * 2.0 * (1.0f64 * (1.25 + 1.0)).exp();
    assert!((stability_constant_c1(&b) - want).abs() < 1e-12 * want);
    let env = error_envelope(&b, 0.5);
    assert_eq!(env.len(), 5);
    assert_eq!(env[0], 0.0);
    assert!(env.windows(2).all(|w| w[1] > w[0]));
    let eps = want * 0.125;
    assert!((env[4] - ((1.0 + eps).powi(4) - 1.0)).abs() < 1e-12 * env[4]);
    assert!(StabilityBudget::new(1.0, 1.0, 3, 1, 4, 1.0).is_err());
    assert!(StabilityBudget::new(-1.0, 2.0, 3, 1, 4, 1.0).is_err());
    assert!(StabilityBudget::chebyshev(1.0, 2.0, 0, 3, 2).is_ok());
}

#[test]
fn experiment_degenerate_cases() {
    let model = HalvingModel {
        kappa: 64.0,
        levels: 0,
        ..HalvingModel::default()
    };
    let t = iterated_reinterpolation_experiment(
        &model.kernel().unwrap(),
        &model.setup().unwrap(),
        4,
        &opts(4),
    )
    .unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!(t.rows[0].error < 1e-12);

    // without oscillation the chain reproduces polynomials exactly
    let flat = FnKernel::new(0.0, |_, _| 0.0, |_, _| Complex64::new(1.0, 0.0));
    let model = HalvingModel {
        levels: 4,
        ..HalvingModel::default()
    };
    let t =
        iterated_reinterpolation_experiment(&flat, &model.setup().unwrap(), 5, &opts(4)).unwrap();
    assert!(t.rows.iter().all(|r| r.error < 1e-12), "{:?}", t.errors());
    assert!(
        iterated_reinterpolation_experiment(&flat, &model.setup().unwrap(), 5, &opts(0)).is_err()
    );
}

#[test]
fn kernel_butterfly_error_falls_with_degree() {
    let k = Helmholtz::new(8.0).unwrap();
    let g = ButterflyGeometry::halving_1d(1.0, 3.0, 3).unwrap();
    let errs: Vec<f64> = [2, 4, 6]
        .iter()
        .map(|&m| kernel_butterfly_error(&k, &g, m, 16).unwrap().relative())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < 0.1 * w[0]), "{errs:?}");
}

#[test]
fn envelope_csv_round_trip() {
    let model = HalvingModel {
        levels: 3,
        ..HalvingModel::default()
    };
    let t = iterated_reinterpolation_experiment(
        &model.kernel().unwrap(),
        &model.setup().unwrap(),
        4,
        &opts(2),
    )
    .unwrap();
    let rows = envelope_rows(&t, 1e-3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.csv");
    write_envelope_csv(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,measured,envelope");
    assert_eq!(read_envelope_csv(&path).unwrap(), rows);
}
