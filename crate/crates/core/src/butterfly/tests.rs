use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::galerkin::PointSystem;
use crate::kernel::{FnKernel, Helmholtz};
use crate::linalg::{norm2, LinearOperator};

fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn line_system(n: usize) -> PointSystem {
    let pts: Vec<Vec<f64>> = (0..n).map(|k| vec![(k as f64 + 0.5) / n as f64]).collect();
    PointSystem::new(pts.clone(), pts).unwrap()
}

fn smooth_kernel(kappa: f64) -> FnKernel {
    FnKernel::new(
        kappa,
        |x, y| ((x[0] - y[0]).powi(2) + 0.01).sqrt(),
        |x, y| Complex64::new(1.0 / ((x[0] - y[0]).powi(2) + 0.01).sqrt(), 0.0),
    )
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b)
}

#[test]
fn multilevel_matvec_matches_chain_expansion() {
    let sys = line_system(512);
    let k = smooth_kernel(20.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 3).unwrap();
    assert!(f.partition().plans.iter().any(|p| p.half_levels >= 2));
    for seed in 0..3 {
        let x = random_vec(512, seed);
        assert!(rel(&f.matvec(&x).unwrap(), &f.matvec_by_blocks(&x).unwrap()) < 1e-13);
    }
}

#[test]
fn transpose_matches_dense_transpose() {
    let sys = line_system(256);
    let k = smooth_kernel(10.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 2).unwrap();
    let dense = f.to_dense().unwrap();
    let x = random_vec(256, 7);
    let want = dense.transpose().matvec(&x);
    assert!(rel(&f.matvec_transpose(&x).unwrap(), &want) < 1e-13);
    let ah = f.apply_adjoint(&x).unwrap();
    let mut want_h = vec![Complex64::new(0.0, 0.0); 256];
    dense.gemv_h_acc(&x, &mut want_h);
    assert!(rel(&ah, &want_h) < 1e-13);
}

#[test]
fn block_dense_matches_unit_probing() {
    let sys = line_system(128);
    let k = smooth_kernel(8.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 2).unwrap();
    let p = f
        .partition()
        .plans
        .iter()
        .position(|p| p.half_levels >= 1)
        .unwrap();
    let (s, t) = f.leaf_pairs(p)[1];
    let b = f.block_dense(s, t).unwrap();
    let ri = &f.row_tree().cluster(s).indices;
    let ci = &f.col_tree().cluster(t).indices;
    for (c, &j) in ci.iter().enumerate() {
        let mut e = vec![Complex64::new(0.0, 0.0); 128];
        e[j] = Complex64::new(1.0, 0.0);
        let col = f.matvec(&e).unwrap();
        for (r, &i) in ri.iter().enumerate() {
            assert!((col[i] - b.get(r, c)).norm() < 1e-14 * col[i].norm().max(1.0));
        }
    }
}

#[test]
fn error_decays_with_degree() {
    let sys = line_system(256);
    let k = smooth_kernel(30.0);
    let dense = sys.dense(&k).unwrap();
    let mut last = f64::INFINITY;
    for m in [2, 4, 6, 8] {
        let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, m).unwrap();
        let mut diff = f.to_dense().unwrap();
        for (d, k) in diff.data_mut().iter_mut().zip(dense.data()) {
            *d -= k;
        }
        let err = diff.frobenius_norm() / dense.frobenius_norm();
        assert!(err < 0.5 * last, "m={m}: {err} vs {last}");
        last = err;
    }
    assert!(last < 1e-6);
}

#[test]
fn polynomial_kernel_is_exact() {
    let sys = line_system(128);
    let k = FnKernel::new(
        0.0,
        |_, _| 0.0,
        |x, y| Complex64::new(1.0 + x[0] * y[0] - 2.0 * x[0].powi(2) * y[0].powi(3), 0.0),
    );
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 3).unwrap();
    let dense = sys.dense(&k).unwrap();
    let got = f.to_dense().unwrap();
    for (a, b) in got.data().iter().zip(dense.data()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn degenerate_transfer_is_identity() {
    let k = Helmholtz::new(5.0).unwrap();
    let b = crate::interp::AxisBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let g = TensorGrid::new(&b, 2).unwrap();
    let z = [3.0, 2.0, 1.0];
    let e = transfer_matrix(&k, Side::Row, &g, &g, &z, &z);
    assert_eq!(e, CMatrix::identity(27));
}

#[test]
fn zero_and_linearity() {
    let sys = line_system(128);
    let k = smooth_kernel(8.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 2).unwrap();
    let zero = vec![Complex64::new(0.0, 0.0); 128];
    assert!(f.matvec(&zero).unwrap().iter().all(|z| z.norm() == 0.0));
    let (u, v) = (random_vec(128, 1), random_vec(128, 2));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let comb: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
    let lhs = f.matvec(&comb).unwrap();
    let fu = f.matvec(&u).unwrap();
    let fv = f.matvec(&v).unwrap();
    let rhs: Vec<Complex64> = fu.iter().zip(&fv).map(|(x, y)| a * x + b * y).collect();
    assert!(rel(&lhs, &rhs) < 1e-12);
    assert!(f.matvec(&zero[..10]).is_err());
}

#[test]
fn storage_matches_prediction() {
    let sys = line_system(256);
    let k = smooth_kernel(8.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 3).unwrap();
    let r = f.storage_report().unwrap();
    assert!(r.matches_prediction());
    assert_eq!(
        r.total_entries,
        r.coupling_entries + r.transfer_entries + r.leaf_entries + r.dense_entries
    );
}

#[test]
fn single_leaf_plan_storage() {
    let rows: Vec<Vec<f64>> = (0..5).map(|k| vec![k as f64 * 0.1]).collect();
    let cols: Vec<Vec<f64>> = (0..5).map(|k| vec![10.0 + k as f64 * 0.1]).collect();
    let sys = PointSystem::new(rows, cols).unwrap();
    let k = smooth_kernel(1.0);
    let f = ButterflyFactorization::build(&k, &sys, 8, 1.0, 2).unwrap();
    let r = f.storage_report().unwrap();
    assert_eq!(f.partition().plans.len(), 1);
    assert_eq!(r.total_entries, 9 + 2 * 3 * 5);
    assert!(f.block_dense(0, 0).is_ok());
}

#[test]
fn nestedness_small_for_high_degree() {
    let sys = line_system(512);
    let k = smooth_kernel(20.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 8).unwrap();
    let (p, plan) = f
        .partition()
        .plans
        .iter()
        .enumerate()
        .find(|(_, p)| p.half_levels >= 1)
        .unwrap();
    let rows = f.row_tree();
    let sigma = rows.descendants_at(plan.row, plan.middle_level).unwrap()[0];
    let son = rows.cluster(sigma).sons[0];
    let tau = f
        .col_tree()
        .descendants_at(plan.col, plan.middle_level)
        .unwrap()[0];
    let r = nestedness_check(&f, &k, &sys, p, sigma, son, tau).unwrap();
    assert!(r.relative < 1e-6, "{r:?}");
    assert!(nestedness_check(&f, &k, &sys, p, sigma, son, plan.col).is_err());
}

#[test]
fn transfer_phase_orientation() {
    // A transfer matrix with the phase difference reversed does not map the
    // parent expansion onto the son's.
    let sys = line_system(512);
    let k = smooth_kernel(40.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 6).unwrap();
    let plan = f
        .partition()
        .plans
        .iter()
        .find(|p| p.half_levels >= 1)
        .unwrap();
    let rows = f.row_tree();
    let cols = f.col_tree();
    let sigma = rows.descendants_at(plan.row, plan.middle_level).unwrap()[0];
    let son = rows.cluster(sigma).sons[0];
    let tau = cols.descendants_at(plan.col, plan.middle_level).unwrap()[0];
    let old = cols.cluster(tau).center();
    let new = cols.cluster(cols.cluster(tau).father.unwrap()).center();
    let good = nestedness_residual(&k, &sys, Side::Row, rows, sigma, son, &old, &new, 6).unwrap();
    let pg = TensorGrid::new(&rows.cluster(sigma).bbox, 6).unwrap();
    let cg = TensorGrid::new(&rows.cluster(son).bbox, 6).unwrap();
    let idx = &rows.cluster(son).indices;
    let direct = sys.moments(Side::Row, idx, &pg, &old, &k);
    let reversed = transfer_matrix(&k, Side::Row, &cg, &pg, &new, &old);
    let bad = sys
        .moments(Side::Row, idx, &cg, &new, &k)
        .matmul(&reversed)
        .unwrap();
    let bad_err = direct
        .data()
        .iter()
        .zip(bad.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(good.relative < 1e-4, "{good:?}");
    assert!(bad_err > 1e3 * good.max_abs, "{bad_err} vs {good:?}");
}

#[test]
fn nestedness_improves_with_degree() {
    let sys = line_system(512);
    let k = smooth_kernel(20.0);
    let f = ButterflyFactorization::build(&k, &sys, 4, 1.0, 2).unwrap();
    let plan = f
        .partition()
        .plans
        .iter()
        .find(|p| p.half_levels >= 1)
        .unwrap();
    let (rows, cols) = (f.row_tree(), f.col_tree());
    let sigma = rows.descendants_at(plan.row, plan.middle_level).unwrap()[0];
    let son = rows.cluster(sigma).sons[0];
    let tau = cols.descendants_at(plan.col, plan.middle_level).unwrap()[0];
    let old = cols.cluster(tau).center();
    let new = cols.cluster(cols.cluster(tau).father.unwrap()).center();
    let res: Vec<f64> = (2..=8)
        .map(|m| {
            nestedness_residual(&k, &sys, Side::Row, rows, sigma, son, &old, &new, m)
                .unwrap()
                .relative
        })
        .collect();
    for w in res.windows(2) {
        assert!(w[1] < 2.0 * w[0], "{res:?}");
    }
    assert!(res[6] < 1e-2 * res[0], "{res:?}");
}
