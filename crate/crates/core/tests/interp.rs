use std::f64::consts::FRAC_1_SQRT_2;

use butterfly::interp::{
    lebesgue_constant, lebesgue_constant_sampled, AxisBox, ChebGrid1D, Interval, TensorInterpolant,
};
use butterfly::Complex64;
use proptest::prelude::*;

fn unit() -> Interval {
    Interval::new(-1.0, 1.0).unwrap()
}

#[test]
fn node_examples() {
    assert_eq!(ChebGrid1D::new(0, unit()).nodes(), &[0.0][..]);
    let g = ChebGrid1D::new(1, unit());
    assert!((g.nodes()[0] + FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((g.nodes()[1] - FRAC_1_SQRT_2).abs() < 1e-15);
    let g = ChebGrid1D::new(1, Interval::new(0.0, 2.0).unwrap());
    assert!((g.nodes()[0] - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-15);
    assert!((g.nodes()[1] - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-15);
}

#[test]
fn lagrange_midpoint() {
    let g = ChebGrid1D::new(1, unit());
    assert!((g.lagrange(0, 0.0) - 0.5).abs() < 1e-15);
    assert!((g.lagrange(1, 0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn constant_is_reproduced() {
    let b = AxisBox::new(vec![-1.0, 2.0, 0.0], vec![0.5, 3.0, 4.0]).unwrap();
    let p = TensorInterpolant::new(&b, 5, |_| Complex64::new(1.0, 0.0)).unwrap();
    for x in [[-1.0, 2.0, 0.0], [0.1, 2.7, 3.3], [0.9, 3.2, 4.5]] {
        assert!((p.eval(&x) - 1.0).norm() < 1e-12);
    }
}

#[test]
fn plane_wave_on_square() {
    let b = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let f = |x: &[f64]| Complex64::cis(x[0]);
    let p = TensorInterpolant::new(&b, 8, f).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let x = [i as f64 / 19.0, j as f64 / 19.0];
            worst = worst.max((p.eval(&x) - f(&x)).norm());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn lebesgue_examples() {
    assert_eq!(lebesgue_constant(0), 1.0);
    assert!((lebesgue_constant(1) - 2f64.sqrt()).abs() < 1e-2 * 2f64.sqrt());
    let ceiling = 2.0 / std::f64::consts::PI * 17f64.ln() + 1.0;
    assert!(lebesgue_constant(16) <= ceiling + 1e-2);
    for m in [2, 5, 9] {
        let coarse = lebesgue_constant_sampled(m, 10 * (m + 1).pow(2));
        let fine = lebesgue_constant_sampled(m, 20 * (m + 1).pow(2) - 1);
        assert!(fine >= coarse - 1e-12, "m {m}: {coarse} then {fine}");
    }
}

#[test]
fn reinterpolation_on_same_grid_is_identity() {
    let b = AxisBox::new(vec![-0.3, 1.0], vec![0.4, 2.5]).unwrap();
    let p = TensorInterpolant::new(&b, 6, |x| Complex64::new(x[0].sin(), x[1].exp())).unwrap();
    let q = TensorInterpolant::new(&b, 6, |x| p.eval(x)).unwrap();
    for (a, c) in p.values().iter().zip(q.values()) {
        assert!((a - c).norm() < 1e-13);
    }
}

#[test]
fn high_degree_exactness() {
    // Degrees 9 and 10 in two dimensions, beyond what the suites cover.
    for m in [9, 10] {
        let b = AxisBox::new(vec![-1.0, 0.5], vec![1.0, 1.5]).unwrap();
        let f = |x: &[f64]| {
            Complex64::new(
                x[0].powi(m as i32) - 2.0 * x[1].powi(m as i32 - 1),
                x[0] * x[1],
            )
        };
        let p = TensorInterpolant::new(&b, m, f).unwrap();
        for k in 0..100 {
            let x = [
                -1.0 + 2.0 * (k as f64 * 0.618).fract(),
                0.5 + (k as f64 * 0.414).fract(),
            ];
            let e = f(&x);
            assert!((p.eval(&x) - e).norm() <= 1e-12 * e.norm().max(1.0));
        }
    }
}

proptest! {
    #[test]
    fn partition_of_unity(m in 0usize..=20, a in -5.0f64..5.0, w in 0.01f64..10.0, t in -1.0f64..1.0) {
        let iv = Interval::new(a, a + w).unwrap();
        let g = ChebGrid1D::new(m, iv);
        let x = iv.from_reference(t);
        let s: f64 = g.basis(x).iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn kronecker_property(m in 0usize..=15, a in -3.0f64..3.0, w in 0.1f64..4.0) {
        let g = ChebGrid1D::new(m, Interval::new(a, a + w).unwrap());
        for (i, &xi) in g.nodes().iter().enumerate() {
            for j in 0..=m {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g.lagrange(j, xi) - want).abs() < 1e-12);
            }
        }
    }
}
