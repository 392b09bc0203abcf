use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    inclusion_statistics, q_hat_scan, solve_rho1, stability_sweep, ExperimentOptions, HalvingModel,
};
use crate::butterfly::ButterflyFactorization;
use crate::clustering::{build_block_partition, build_cluster_tree, check_assumption_eta2};
use crate::error::{Error, Result};
use crate::galerkin::{sphere_mesh, Assembler, Discretization, QuadratureConfig};
use crate::interp::{AxisBox, ChebGrid1D, Interval, TensorInterpolant};
use crate::kernel::{Helmholtz, Reinterpolant, Side};
use crate::linalg::{norm2, LinearOperator};

pub const SUITES: [&str; 5] = ["interp", "clustering", "butterfly", "analysis", "all"];

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Runs a named suite; `"all"` runs every suite in turn.
pub fn verify(suite: &str) -> Result<SuiteReport> {
    let checks = match suite {
        "interp" => interp_suite()?,
        "clustering" => clustering_suite()?,
        "butterfly" => butterfly_suite()?,
        "analysis" => analysis_suite()?,
        "all" => {
            let mut all = Vec::new();
            for s in &SUITES[..4] {
                for mut c in verify(s)?.checks {
                    c.name = format!("{s}/{}", c.name);
                    all.push(c);
                }
            }
            all
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: suite.to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn random_box(rng: &mut ChaCha8Rng, d: usize) -> Result<AxisBox> {
    let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..1.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|a| a + rng.gen_range(0.1..2.0)).collect();
    AxisBox::new(lo, hi)
}

/// Worst relative error of tensor interpolation of random polynomials of
/// coordinate degree `m` at `points` random points.
pub(crate) fn polynomial_exactness(d: usize, m: usize, points: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = random_box(&mut rng, d)?;
    let n1 = m + 1;
    let coeffs: Vec<Complex64> = (0..n1.pow(d as u32))
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let c = bbox.center();
    let poly = |x: &[f64]| -> Complex64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let mut rest = k;
                let mut mono = 1.0;
                for i in 0..d {
                    mono *= (x[i] - c[i]).powi((rest % n1) as i32);
                    rest /= n1;
                }
                a * mono
            })
            .sum()
    };
    let interp = TensorInterpolant::new(&bbox, m, poly)?;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x: Vec<f64> = (0..d)
            .map(|i| rng.gen_range(bbox.lo()[i]..bbox.hi()[i]))
            .collect();
        let exact = poly(&x);
        worst = worst.max((interp.eval(&x) - exact).norm() / exact.norm().max(1.0));
    }
    Ok(worst)
}

/// Worst relative error of one re-interpolation applied to `E_z π` with a
/// random `π ∈ Q_m`.
pub(crate) fn reinterpolation_exactness(
    d: usize,
    m: usize,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = random_box(&mut rng, d)?;
    let z: Vec<f64> = (0..d).map(|_| rng.gen_range(3.0..5.0)).collect();
    let kernel = Helmholtz::new(rng.gen_range(1.0..10.0))?;
    let pi = TensorInterpolant::new(&bbox, m, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })?;
    let f = |x: &[f64]| crate::kernel::anchor_factor(&kernel, Side::Row, &z, x) * pi.eval(x);
    let r = Reinterpolant::new(&kernel, Side::Row, &z, &bbox, m, |x| Ok(f(x)))?;
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x: Vec<f64> = (0..d)
            .map(|i| rng.gen_range(bbox.lo()[i]..bbox.hi()[i]))
            .collect();
        let exact = f(&x);
        worst = worst.max((r.eval(&x) - exact).norm() / exact.norm().max(1.0));
    }
    Ok(worst)
}

fn interp_suite() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let g = ChebGrid1D::new(1, Interval::new(-1.0, 1.0)?);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let nodes_ok = (g.nodes()[0] + h).abs() < 1e-15 && (g.nodes()[1] - h).abs() < 1e-15;
    out.push(check(
        "chebyshev-nodes",
        nodes_ok,
        format!("{:?}", g.nodes()),
    ));

    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for m in [0, 1, 4, 8, 20] {
        let g = ChebGrid1D::new(m, Interval::new(-1.0, 1.0)?);
        for k in 0..=400 {
            let x = -2.0 + 4.0 * k as f64 / 400.0;
            let l = g.basis(x);
            let dev = (l.iter().sum::<f64>() - 1.0).abs();
            if x.abs() <= 1.0 {
                inside = inside.max(dev);
            } else {
                outside = outside.max(dev / l.iter().map(|v| v.abs()).sum::<f64>());
            }
        }
    }
    out.push(check(
        "partition-of-unity",
        inside <= 1e-13 && outside <= 1e-13,
        format!("max deviation {inside:.2e} inside, {outside:.2e} relative to sum |L_j| outside"),
    ));

    let mut worst = 0.0f64;
    for d in 1..=3 {
        for m in 0..=8 {
            worst = worst.max(polynomial_exactness(d, m, 100, (10 * d + m) as u64)?);
        }
    }
    out.push(check(
        "polynomial-exactness",
        worst <= 1e-12,
        format!("max relative error {worst:.2e}"),
    ));

    let mut worst = 0.0f64;
    for d in 1..=3 {
        for m in 0..=8 {
            worst = worst.max(reinterpolation_exactness(
                d,
                m,
                100,
                (100 + 10 * d + m) as u64,
            )?);
        }
    }
    out.push(check(
        "reinterpolation-exactness",
        worst <= 1e-12,
        format!("max relative error {worst:.2e}"),
    ));
    Ok(out)
}

fn level3() -> Result<Discretization> {
    Discretization::new(sphere_mesh(3)?, QuadratureConfig::default())
}

fn clustering_suite() -> Result<Vec<CheckResult>> {
    let disc = level3()?;
    let n = disc.len();
    let rows = build_cluster_tree(&disc.row_supports(), 32)?;
    let cols = build_cluster_tree(&disc.col_supports(), 32)?;
    let stats = rows.stats();
    let part = build_block_partition(&rows, &cols, 1.0)?;
    let covered = part.covered_entries(&rows, &cols);
    let eta2 = check_assumption_eta2(&rows, &cols, &part, 2.0, f64::INFINITY)?;
    Ok(vec![
        check(
            "uniform-depth",
            rows.leaves()
                .iter()
                .all(|&l| rows.cluster(l).level == stats.depth)
                && rows
                    .clusters()
                    .iter()
                    .all(|c| c.is_leaf() == (c.level == stats.depth)),
            format!(
                "depth {} levels {:?}",
                stats.depth, stats.clusters_per_level
            ),
        ),
        check(
            "leaf-size",
            stats.min_leaf_size <= 32,
            format!(
                "leaf sizes {}..{}",
                stats.min_leaf_size, stats.max_leaf_size
            ),
        ),
        check(
            "disjoint-cover",
            covered == n * n,
            format!("{covered} of {} entries", n * n),
        ),
        check(
            "shrinking",
            eta2.q_bar < 1.0,
            format!("q_bar {:.3}, eta2_min {:.3e}", eta2.q_bar, eta2.eta2_min),
        ),
    ])
}

fn butterfly_suite() -> Result<Vec<CheckResult>> {
    let disc = level3()?;
    let kernel = Helmholtz::new(2.0)?;
    let fact = ButterflyFactorization::build(&kernel, &disc, 32, 1.0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    let mut adj = 0.0f64;
    for _ in 0..10 {
        let x: Vec<Complex64> = (0..fact.ncols())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast = fact.matvec(&x)?;
        let slow = fact.matvec_by_blocks(&x)?;
        let diff: Vec<Complex64> = fast.iter().zip(&slow).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&slow));
        let y: Vec<Complex64> = (0..fact.nrows())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let lhs: Complex64 = fast.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: Complex64 = x
            .iter()
            .zip(fact.apply_transpose(&y)?)
            .map(|(a, b)| a * b)
            .sum();
        adj = adj.max((lhs - rhs).norm() / lhs.norm());
    }
    let st = fact.storage_report()?;
    Ok(vec![
        check(
            "matvec-vs-blocks",
            worst <= 1e-12,
            format!("max relative difference {worst:.2e}"),
        ),
        check(
            "transpose-identity",
            adj <= 1e-12,
            format!("max relative difference {adj:.2e}"),
        ),
        check(
            "storage-prediction",
            st.matches_prediction(),
            format!("{} entries, ratio {:.3}", st.total_entries, st.ratio),
        ),
    ])
}

fn analysis_suite() -> Result<Vec<CheckResult>> {
    let stats = inclusion_statistics(100, 5e-3, 0)?;
    let asym = solve_rho1(1e4, 0.5)? / 1e4;
    let q = [0.25, 0.5, 0.75]
        .iter()
        .map(|&h| q_hat_scan(h, 1.1, 1e6, 400))
        .collect::<Result<Vec<_>>>()?;
    let opts = ExperimentOptions {
        trials: 16,
        samples: 64,
        norm_samples: 4096,
        seed: 0,
    };
    let sweep = stability_sweep(&HalvingModel::default(), &[2, 4, 6, 8], &opts)?;
    let ratios = sweep.eps_ratios();
    Ok(vec![
        check(
            "inclusion",
            stats.included == stats.samples,
            format!("{} of {} samples included", stats.included, stats.samples),
        ),
        check(
            "inclusion-sharpness",
            stats.broken_by_shrink * 10 >= stats.samples * 9,
            format!(
                "{} of {} samples broken by a {:.1}% shrink",
                stats.broken_by_shrink,
                stats.samples,
                100.0 * stats.shrink
            ),
        ),
        check(
            "asymptotic-ratio",
            (asym - 0.5).abs() <= 1e-3,
            format!("rho1/rho0 = {asym:.6}"),
        ),
        check(
            "q-hat",
            q.iter().all(|&v| v < 1.0),
            format!("sup ratios {q:.4?}"),
        ),
        check(
            "stability-shape",
            ratios.iter().all(|&r| r <= 0.7) && sweep.norms_bounded(1e-3),
            format!("eps {:?}, ratios {ratios:.3?}", sweep.envelope),
        ),
    ])
}
