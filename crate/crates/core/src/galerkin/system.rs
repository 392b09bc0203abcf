use num_complex::Complex64;
use rayon::prelude::*;

use super::assembly::Discretization;
use crate::clustering::Support;
use crate::error::{Error, Result};
use crate::interp::{AxisBox, TensorGrid};
use crate::kernel::{anchor_factor, Kernel, Side};
use crate::linalg::CMatrix;

/// Source of matrix entries and interpolation moments for a pair of
/// discrete spaces.
pub trait Assembler: Sync {
    fn nrows(&self) -> usize;

    fn ncols(&self) -> usize;

    fn row_supports(&self) -> Vec<Support>;

    fn col_supports(&self) -> Vec<Support>;

    fn block<K: Kernel + ?Sized>(
        &self,
        rows: &[usize],
        cols: &[usize],
        kernel: &K,
    ) -> Result<CMatrix>;

    /// One row per index, one column per node of `grid`.
    fn moments<K: Kernel + ?Sized>(
        &self,
        side: Side,
        indices: &[usize],
        grid: &TensorGrid,
        anchor: &[f64],
        kernel: &K,
    ) -> CMatrix;

    fn dense<K: Kernel + ?Sized>(&self, kernel: &K) -> Result<CMatrix> {
        let rows: Vec<usize> = (0..self.nrows()).collect();
        let cols: Vec<usize> = (0..self.ncols()).collect();
        self.block(&rows, &cols, kernel)
    }
}

impl Assembler for Discretization {
    fn nrows(&self) -> usize {
        self.len()
    }

    fn ncols(&self) -> usize {
        self.len()
    }

    fn row_supports(&self) -> Vec<Support> {
        self.supports()
    }

    fn col_supports(&self) -> Vec<Support> {
        self.supports()
    }

    fn block<K: Kernel + ?Sized>(
        &self,
        rows: &[usize],
        cols: &[usize],
        kernel: &K,
    ) -> Result<CMatrix> {
        self.assemble_block(rows, cols, kernel)
    }

    fn moments<K: Kernel + ?Sized>(
        &self,
        side: Side,
        indices: &[usize],
        grid: &TensorGrid,
        anchor: &[f64],
        kernel: &K,
    ) -> CMatrix {
        self.leaf_moments(indices, grid, anchor, side, kernel)
    }
}

/// Point evaluation: `K_ij = k(x_i, y_j)`, the moments are `E_z(x_i) L_p(x_i)`.
#[derive(Clone, Debug)]
pub struct PointSystem {
    rows: Vec<Vec<f64>>,
    cols: Vec<Vec<f64>>,
}

impl PointSystem {
    pub fn new(rows: Vec<Vec<f64>>, cols: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows
            .first()
            .or(cols.first())
            .map(Vec::len)
            .ok_or(Error::EmptySample)?;
        if let Some(p) = rows.iter().chain(&cols).find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        Ok(Self { rows, cols })
    }

    pub fn row_points(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn col_points(&self) -> &[Vec<f64>] {
        &self.cols
    }

    fn supports(points: &[Vec<f64>]) -> Vec<Support> {
        points
            .iter()
            .map(|p| Support {
                proxy: p.clone(),
                bbox: AxisBox::new_closed(p.clone(), p.clone()).expect("finite point"),
            })
            .collect()
    }
}

impl Assembler for PointSystem {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn row_supports(&self) -> Vec<Support> {
        Self::supports(&self.rows)
    }

    fn col_supports(&self) -> Vec<Support> {
        Self::supports(&self.cols)
    }

    fn block<K: Kernel + ?Sized>(
        &self,
        rows: &[usize],
        cols: &[usize],
        kernel: &K,
    ) -> Result<CMatrix> {
        let data = rows
            .par_iter()
            .map(|&i| {
                cols.iter()
                    .map(|&j| kernel.eval(&self.rows[i], &self.cols[j]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CMatrix::from_vec(rows.len(), cols.len(), data.concat())
    }

    fn moments<K: Kernel + ?Sized>(
        &self,
        side: Side,
        indices: &[usize],
        grid: &TensorGrid,
        anchor: &[f64],
        kernel: &K,
    ) -> CMatrix {
        let points = match side {
            Side::Row => &self.rows,
            Side::Col => &self.cols,
        };
        let mut out = CMatrix::zeros(indices.len(), grid.len());
        let mut basis = vec![0.0; grid.len()];
        for (r, &i) in indices.iter().enumerate() {
            let e = anchor_factor(kernel, side, anchor, &points[i]);
            grid.basis_into(&points[i], &mut basis);
            for (o, l) in out.row_mut(r).iter_mut().zip(&basis) {
                *o = e * Complex64::new(*l, 0.0);
            }
        }
        out
    }
}

/// Serves matrix blocks from an already assembled dense matrix and delegates
/// the interpolation moments to the wrapped assembler. The kernel passed to
/// [`Assembler::block`] is ignored.
#[derive(Clone, Copy, Debug)]
pub struct Precomputed<'a, A> {
    inner: &'a A,
    dense: &'a CMatrix,
}

impl<'a, A: Assembler> Precomputed<'a, A> {
    pub fn new(inner: &'a A, dense: &'a CMatrix) -> Result<Self> {
        if dense.rows() != inner.nrows() || dense.cols() != inner.ncols() {
            return Err(Error::DimensionMismatch {
                expected: inner.nrows() * inner.ncols(),
                got: dense.len(),
            });
        }
        Ok(Self { inner, dense })
    }
}

impl<A: Assembler> Assembler for Precomputed<'_, A> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn row_supports(&self) -> Vec<Support> {
        self.inner.row_supports()
    }

    fn col_supports(&self) -> Vec<Support> {
        self.inner.col_supports()
    }

    fn block<K: Kernel + ?Sized>(
        &self,
        rows: &[usize],
        cols: &[usize],
        _kernel: &K,
    ) -> Result<CMatrix> {
        Ok(CMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            self.dense.get(rows[a], cols[b])
        }))
    }

    fn moments<K: Kernel + ?Sized>(
        &self,
        side: Side,
        indices: &[usize],
        grid: &TensorGrid,
        anchor: &[f64],
        kernel: &K,
    ) -> CMatrix {
        self.inner.moments(side, indices, grid, anchor, kernel)
    }

    fn dense<K: Kernel + ?Sized>(&self, _kernel: &K) -> Result<CMatrix> {
        Ok(self.dense.clone())
    }
}
