use butterfly::bench::frobenius_error;
use butterfly::butterfly::ButterflyFactorization;
use butterfly::galerkin::{sphere_mesh, Discretization, Precomputed, QuadratureConfig};
use butterfly::kernel::Helmholtz;
use butterfly::linalg::{norm2, CMatrix};
use butterfly::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn sphere(level: usize) -> Discretization {
    Discretization::new(sphere_mesh(level).unwrap(), QuadratureConfig::default()).unwrap()
}

#[test]
fn matvec_is_linear() {
    let disc = sphere(2);
    let k = Helmholtz::new(2.0).unwrap();
    let f = ButterflyFactorization::build(&k, &disc, 4, 1.0, 2).unwrap();
    let n = disc.len();
    assert_eq!((f.nrows(), f.ncols()), (n, n));
    assert!(f
        .matvec(&vec![Complex64::new(0.0, 0.0); n])
        .unwrap()
        .iter()
        .all(|v| v.norm() == 0.0));
    let (x, y) = (random_vec(n, 1), random_vec(n, 2));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let combo: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let lhs = f.matvec(&combo).unwrap();
    let (fx, fy) = (f.matvec(&x).unwrap(), f.matvec(&y).unwrap());
    let diff: Vec<Complex64> = lhs
        .iter()
        .zip(fx.iter().zip(&fy))
        .map(|(l, (p, q))| l - a * p - b * q)
        .collect();
    assert!(norm2(&diff) <= 1e-13 * norm2(&lhs));
    assert!(f.matvec(&x[1..]).is_err());
}

#[test]
fn inadmissible_blocks_are_exact() {
    let disc = sphere(2);
    let k = Helmholtz::new(2.0).unwrap();
    let dense = disc.assemble_dense(&k, 64).unwrap();
    let f = ButterflyFactorization::build(&k, &disc, 4, 1.0, 1).unwrap();
    let (rows, cols) = (f.row_tree(), f.col_tree());
    assert!(!f.partition().inadmissible.is_empty());
    for (kk, &(s, t)) in f.partition().inadmissible.iter().enumerate() {
        let block = f.dense_block(kk);
        for (a, &i) in rows.cluster(s).indices.iter().enumerate() {
            for (b, &j) in cols.cluster(t).indices.iter().enumerate() {
                assert_eq!(block.get(a, b), dense.get(i, j));
            }
        }
    }
}

#[test]
fn error_decreases_with_degree() {
    let disc = sphere(3);
    let k = Helmholtz::new(2.0).unwrap();
    let dense = disc.assemble_dense(&k, 64).unwrap();
    let errs: Vec<f64> = (0..=3)
        .map(|m| {
            let f = ButterflyFactorization::build(&k, &disc, 32, 1.0, m).unwrap();
            assert!(!f.partition().admissible.is_empty());
            frobenius_error(&dense, &f).unwrap()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < 0.5 * w[0]), "{errs:?}");
    assert!(errs[3] < 1e-4 * dense.frobenius_norm(), "{errs:?}");
}

#[test]
fn low_degree_storage_is_compressed() {
    let disc = sphere(4);
    let k = Helmholtz::new(4.0).unwrap();
    // entry counts do not depend on the values of the near-field blocks
    let zero = CMatrix::zeros(disc.len(), disc.len());
    let source = Precomputed::new(&disc, &zero).unwrap();
    for m in [0, 1] {
        let f = ButterflyFactorization::build(&k, &source, 32, 1.0, m).unwrap();
        let st = f.storage_report().unwrap();
        assert!(st.matches_prediction());
        assert_eq!(st.dense_equivalent, 2048 * 2048);
        assert!(st.ratio < 1.0, "m {m}: {}", st.ratio);
    }
}
