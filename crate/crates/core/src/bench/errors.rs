use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::butterfly::ButterflyFactorization;
use crate::error::{Error, Result};
use crate::linalg::{norm2, CMatrix, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    pub max_iterations: usize,
    /// Stop once the eigenvalue estimate changes by less than this fraction.
    pub rel_tol: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    /// Estimate of `‖K - K̃‖₂`, never above the true value up to rounding.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `x ↦ A x - B x`
pub struct Difference<'a, A: ?Sized, B: ?Sized> {
    pub exact: &'a A,
    pub approx: &'a B,
}

impl<A: LinearOperator + ?Sized, B: LinearOperator + ?Sized> LinearOperator
    for Difference<'_, A, B>
{
    fn nrows(&self) -> usize {
        self.exact.nrows()
    }

    fn ncols(&self) -> usize {
        self.exact.ncols()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        sub(self.exact.apply(x)?, self.approx.apply(x)?)
    }

    fn apply_transpose(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        sub(
            self.exact.apply_transpose(x)?,
            self.approx.apply_transpose(x)?,
        )
    }

    fn apply_adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        sub(self.exact.apply_adjoint(x)?, self.approx.apply_adjoint(x)?)
    }
}

fn sub(mut a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    a.iter_mut().zip(b).for_each(|(u, v)| *u -= v);
    Ok(a)
}

/// Largest singular value of `op` by power iteration on `opᴴ op` from a
/// seeded random start. The estimate `‖opᴴ op v‖` for unit `v` is a lower
/// bound of `σ_max²`.
pub fn power_norm<A: LinearOperator + ?Sized>(
    op: &A,
    cfg: &PowerIteration,
    seed: u64,
) -> Result<SpectralEstimate> {
    if cfg.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "power iteration needs at least one step".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..op.ncols())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n0 = norm2(&v);
    if n0 == 0.0 {
        return Err(Error::EmptySample);
    }
    v.iter_mut().for_each(|z| *z /= n0);
    let mut lambda = 0.0f64;
    for it in 1..=cfg.max_iterations {
        let u = op.apply_adjoint(&op.apply(&v)?)?;
        let next = norm2(&u);
        if next == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        let done = it > 1 && (next - lambda).abs() <= cfg.rel_tol * next;
        lambda = next;
        if done {
            return Ok(SpectralEstimate {
                value: lambda.sqrt(),
                iterations: it,
                converged: true,
            });
        }
        v = u.into_iter().map(|z| z / next).collect();
    }
    Ok(SpectralEstimate {
        value: lambda.sqrt(),
        iterations: cfg.max_iterations,
        converged: false,
    })
}

/// `‖K - K̃‖₂` estimated without forming the difference.
pub fn spectral_error<A, B>(
    dense: &A,
    fact: &B,
    cfg: &PowerIteration,
    seed: u64,
) -> Result<SpectralEstimate>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    if dense.nrows() != fact.nrows() || dense.ncols() != fact.ncols() {
        return Err(Error::DimensionMismatch {
            expected: dense.nrows() * dense.ncols(),
            got: fact.nrows() * fact.ncols(),
        });
    }
    power_norm(
        &Difference {
            exact: dense,
            approx: fact,
        },
        cfg,
        seed,
    )
}

/// `‖K - K̃‖_F` accumulated block by block over the partition.
pub fn frobenius_error(dense: &CMatrix, fact: &ButterflyFactorization) -> Result<f64> {
    if dense.rows() != fact.nrows() || dense.cols() != fact.ncols() {
        return Err(Error::DimensionMismatch {
            expected: dense.len(),
            got: fact.nrows() * fact.ncols(),
        });
    }
    let (rows, cols) = (fact.row_tree(), fact.col_tree());
    let dist = |s: usize, t: usize, b: &CMatrix| -> f64 {
        let (ri, ci) = (&rows.cluster(s).indices, &cols.cluster(t).indices);
        ri.iter()
            .enumerate()
            .map(|(a, &i)| {
                ci.iter()
                    .enumerate()
                    .map(|(c, &j)| (dense.get(i, j) - b.get(a, c)).norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    };
    let mut total = 0.0;
    for p in 0..fact.partition().plans.len() {
        for (s, t) in fact.leaf_pairs(p) {
            total += dist(s, t, &fact.block_dense(s, t)?);
        }
    }
    for (k, &(s, t)) in fact.partition().inadmissible.iter().enumerate() {
        total += dist(s, t, fact.dense_block(k));
    }
    Ok(total.sqrt())
}
