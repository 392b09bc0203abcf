//! Butterfly factorisation of the admissible blocks of a Galerkin matrix.
//!
//! For a plan `σ̂ × τ̂` with `L` half levels the block of a leaf pair
//! `(σ_L, τ_L)` is approximated by
//!
//! ```text
//! V^{σ_L,τ_{-L}} E^{σ_L,τ_{-L+1}} ⋯ E^{σ_1,τ_0} S^{σ_0,τ_0}
//!     (E^{τ_1,σ_0})ᵀ ⋯ (E^{τ_L,σ_{-L+1}})ᵀ (W^{τ_L,σ_{-L}})ᵀ
//! ```
//!
//! where `σ_k`, `τ_k` are the ancestors of the leaves on level `L_mid + k`.
//! Each matrix is keyed by its own cluster and the paired cluster on the
//! other side whose centre serves as the phase anchor.

mod apply;
mod nested;
mod storage;

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clustering::{
    build_block_partition, build_cluster_tree, BlockPartition, ButterflyPlan, ClusterId,
    ClusterTree,
};
use crate::error::{Error, Result};
use crate::galerkin::Assembler;
use crate::interp::TensorGrid;
use crate::kernel::{Kernel, Side};
use crate::linalg::CMatrix;

pub use nested::{nestedness_check, nestedness_residual, NestednessResidual};
pub use storage::StorageReport;

/// Matrices attached to one side (rows or columns) of a plan.
#[derive(Clone, Debug)]
pub(crate) struct SideFactors {
    /// Slot `k` holds the descendants of the plan root on level `L_mid - L + k`.
    pub levels: Vec<Vec<ClusterId>>,
    /// Position of a cluster inside its slot.
    pub pos: HashMap<ClusterId, usize>,
    /// `transfers[ℓ][c * n + o]` for a child `c` in slot `L + ℓ + 1` and a
    /// paired cluster `o` in slot `L - ℓ` of the other side (`n` clusters there).
    pub transfers: Vec<Vec<CMatrix>>,
    /// `leaves[c * n + o]` for a leaf `c` in slot `2L` and `o` in slot `0`
    /// of the other side.
    pub leaves: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub(crate) struct PlanFactors {
    pub half: usize,
    pub row: SideFactors,
    pub col: SideFactors,
    /// `coupling[r * n_col + c]` over the middle slot.
    pub coupling: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct ButterflyFactorization {
    rows: ClusterTree,
    cols: ClusterTree,
    partition: BlockPartition,
    degree: usize,
    kappa: f64,
    plans: Vec<PlanFactors>,
    dense: Vec<CMatrix>,
}

/// Transfer matrix from a parent expansion anchored at `old` to a child
/// expansion anchored at `new`:
/// `E_np = exp(iκ(Φ(ξ_n, old) - Φ(ξ_n, new))) L_p^{parent}(ξ_n)` on the row
/// side, with the arguments of `Φ` swapped on the column side.
pub fn transfer_matrix<K: Kernel + ?Sized>(
    kernel: &K,
    side: Side,
    child: &TensorGrid,
    parent: &TensorGrid,
    old: &[f64],
    new: &[f64],
) -> CMatrix {
    let kappa = kernel.wavenumber();
    let mut e = CMatrix::zeros(child.len(), parent.len());
    let mut basis = vec![0.0; parent.len()];
    for n in 0..child.len() {
        let xi = child.point(n);
        let phase = match side {
            Side::Row => kernel.phase(xi, old) - kernel.phase(xi, new),
            Side::Col => kernel.phase(old, xi) - kernel.phase(new, xi),
        };
        let f = Complex64::cis(kappa * phase);
        parent.basis_into(xi, &mut basis);
        for (o, l) in e.row_mut(n).iter_mut().zip(&basis) {
            *o = f * l;
        }
    }
    e
}

/// Coupling matrix `S_pq = k_{x0,y0}(ξ_p, η_q)`.
pub fn coupling_matrix<K: Kernel + ?Sized>(
    kernel: &K,
    row_grid: &TensorGrid,
    col_grid: &TensorGrid,
    x0: &[f64],
    y0: &[f64],
) -> Result<CMatrix> {
    let mut s = CMatrix::zeros(row_grid.len(), col_grid.len());
    for p in 0..row_grid.len() {
        for q in 0..col_grid.len() {
            s.set(
                p,
                q,
                kernel.modified(x0, y0, row_grid.point(p), col_grid.point(q))?,
            );
        }
    }
    Ok(s)
}

struct GridCache<'a> {
    tree: &'a ClusterTree,
    degree: usize,
    grids: HashMap<ClusterId, TensorGrid>,
}

impl<'a> GridCache<'a> {
    fn new(tree: &'a ClusterTree, degree: usize) -> Self {
        Self {
            tree,
            degree,
            grids: HashMap::new(),
        }
    }

    fn get(&mut self, c: ClusterId) -> Result<&TensorGrid> {
        if !self.grids.contains_key(&c) {
            let g = TensorGrid::new(&self.tree.cluster(c).bbox, self.degree)?;
            self.grids.insert(c, g);
        }
        Ok(&self.grids[&c])
    }
}

/// Descendants per slot and the position of each cluster in its slot.
type SlotLayout = (Vec<Vec<ClusterId>>, HashMap<ClusterId, usize>);

fn side_levels(tree: &ClusterTree, plan: &ButterflyPlan, root: ClusterId) -> Result<SlotLayout> {
    let levels = (0..=2 * plan.half_levels)
        .map(|k| tree.descendants_at(root, plan.slot_level(k)))
        .collect::<Result<Vec<_>>>()?;
    let pos = levels
        .iter()
        .flat_map(|l| l.iter().enumerate().map(|(i, &c)| (c, i)))
        .collect();
    Ok((levels, pos))
}

#[allow(clippy::too_many_arguments)]
fn build_side<K: Kernel + ?Sized, A: Assembler>(
    kernel: &K,
    asm: &A,
    side: Side,
    own: &ClusterTree,
    other: &ClusterTree,
    levels: Vec<Vec<ClusterId>>,
    pos: HashMap<ClusterId, usize>,
    other_levels: &[Vec<ClusterId>],
    grids: &mut GridCache,
) -> Result<SideFactors> {
    let half = (levels.len() - 1) / 2;
    let mut transfers = Vec::with_capacity(half);
    for l in 0..half {
        let children = &levels[half + l + 1];
        let paired = &other_levels[half - l];
        let mut mats = Vec::with_capacity(children.len() * paired.len());
        for &c in children {
            let father = own.cluster(c).father.expect("below plan root");
            let child_grid = grids.get(c)?.clone();
            let parent_grid = grids.get(father)?;
            for &o in paired {
                let old = other.cluster(o).center();
                let new = other
                    .cluster(other.cluster(o).father.expect("below plan root"))
                    .center();
                mats.push(transfer_matrix(
                    kernel,
                    side,
                    &child_grid,
                    parent_grid,
                    &old,
                    &new,
                ));
            }
        }
        transfers.push(mats);
    }
    let mut leaves = Vec::new();
    for &c in &levels[2 * half] {
        let grid = grids.get(c)?;
        for &o in &other_levels[0] {
            let anchor = other.cluster(o).center();
            leaves.push(asm.moments(side, &own.cluster(c).indices, grid, &anchor, kernel));
        }
    }
    Ok(SideFactors {
        levels,
        pos,
        transfers,
        leaves,
    })
}

fn build_plan<K: Kernel + ?Sized, A: Assembler>(
    kernel: &K,
    asm: &A,
    rows: &ClusterTree,
    cols: &ClusterTree,
    plan: &ButterflyPlan,
    degree: usize,
) -> Result<PlanFactors> {
    let half = plan.half_levels;
    let (row_levels, row_pos) = side_levels(rows, plan, plan.row)?;
    let (col_levels, col_pos) = side_levels(cols, plan, plan.col)?;
    let mut row_grids = GridCache::new(rows, degree);
    let mut col_grids = GridCache::new(cols, degree);

    let mut coupling = Vec::with_capacity(row_levels[half].len() * col_levels[half].len());
    for &r in &row_levels[half] {
        let x0 = rows.cluster(r).center();
        let rg = row_grids.get(r)?.clone();
        for &c in &col_levels[half] {
            let y0 = cols.cluster(c).center();
            coupling.push(coupling_matrix(kernel, &rg, col_grids.get(c)?, &x0, &y0)?);
        }
    }
    let row = build_side(
        kernel,
        asm,
        Side::Row,
        rows,
        cols,
        row_levels.clone(),
        row_pos,
        &col_levels,
        &mut row_grids,
    )?;
    let col = build_side(
        kernel,
        asm,
        Side::Col,
        cols,
        rows,
        col_levels,
        col_pos,
        &row_levels,
        &mut col_grids,
    )?;
    Ok(PlanFactors {
        half,
        row,
        col,
        coupling,
    })
}

impl ButterflyFactorization {
    /// Assembles all coupling, transfer and leaf matrices of every plan and
    /// the dense inadmissible blocks.
    pub fn new<K: Kernel + ?Sized, A: Assembler>(
        kernel: &K,
        asm: &A,
        rows: ClusterTree,
        cols: ClusterTree,
        partition: BlockPartition,
        degree: usize,
    ) -> Result<Self> {
        if rows.n_indices() != asm.nrows() || cols.n_indices() != asm.ncols() {
            return Err(Error::DimensionMismatch {
                expected: asm.nrows() * asm.ncols(),
                got: rows.n_indices() * cols.n_indices(),
            });
        }
        let plans = partition
            .plans
            .par_iter()
            .map(|plan| build_plan(kernel, asm, &rows, &cols, plan, degree))
            .collect::<Result<Vec<_>>>()?;
        let dense = partition
            .inadmissible
            .iter()
            .map(|&(s, t)| asm.block(&rows.cluster(s).indices, &cols.cluster(t).indices, kernel))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols,
            partition,
            degree,
            kappa: kernel.wavenumber(),
            plans,
            dense,
        })
    }

    /// Builds cluster trees and the block partition, then factorises.
    pub fn build<K: Kernel + ?Sized, A: Assembler>(
        kernel: &K,
        asm: &A,
        leaf_size: usize,
        eta1: f64,
        degree: usize,
    ) -> Result<Self> {
        let rows = build_cluster_tree(&asm.row_supports(), leaf_size)?;
        let cols = build_cluster_tree(&asm.col_supports(), leaf_size)?;
        let partition = build_block_partition(&rows, &cols, eta1)?;
        Self::new(kernel, asm, rows, cols, partition, degree)
    }

    pub fn nrows(&self) -> usize {
        self.rows.n_indices()
    }

    pub fn ncols(&self) -> usize {
        self.cols.n_indices()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn wavenumber(&self) -> f64 {
        self.kappa
    }

    pub fn row_tree(&self) -> &ClusterTree {
        &self.rows
    }

    pub fn col_tree(&self) -> &ClusterTree {
        &self.cols
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    /// Dense block stored for the `k`-th inadmissible leaf.
    pub fn dense_block(&self, k: usize) -> &CMatrix {
        &self.dense[k]
    }

    /// All leaf pairs `(σ_L, τ_L)` below plan `p`.
    pub fn leaf_pairs(&self, p: usize) -> Vec<(ClusterId, ClusterId)> {
        let f = &self.plans[p];
        let h = 2 * f.half;
        f.row.levels[h]
            .iter()
            .flat_map(|&s| f.col.levels[h].iter().map(move |&t| (s, t)))
            .collect()
    }

    /// Coupling matrix of the middle block `(σ_0, τ_0)` of plan `p`.
    pub fn coupling(&self, p: usize, row: ClusterId, col: ClusterId) -> Result<&CMatrix> {
        let f = &self.plans[p];
        let (Some(&r), Some(&c)) = (f.row.pos.get(&row), f.col.pos.get(&col)) else {
            return Err(Error::BlockNotInPlan { row, col });
        };
        Ok(&f.coupling[r * f.col.levels[f.half].len() + c])
    }

    /// Explicit `V E ⋯ E S Eᵀ ⋯ Eᵀ Wᵀ` for a pair of leaves.
    pub fn block_dense(&self, row: ClusterId, col: ClusterId) -> Result<CMatrix> {
        let not_covered = Error::BlockNotInPlan { row, col };
        let depth = self.rows.depth();
        let (r, c) = (self.rows.get(row)?, self.cols.get(col)?);
        if r.level != depth || c.level != depth {
            return Err(not_covered);
        }
        let p = self
            .partition
            .plan_containing(&self.rows, &self.cols, row, col)
            .ok_or(not_covered)?;
        let plan = &self.partition.plans[p];
        let f = &self.plans[p];
        let a = chain(&f.row, &f.col, &self.rows, &self.cols, plan, row, col)?;
        let b = chain(&f.col, &f.row, &self.cols, &self.rows, plan, col, row)?;
        let s = self.coupling(
            p,
            self.rows.ancestor_at(row, plan.middle_level)?,
            self.cols.ancestor_at(col, plan.middle_level)?,
        )?;
        a.matmul(s)?.matmul(&b.transpose())
    }
}

/// `V E ⋯ E` for one side, from the leaf up to the middle level.
fn chain(
    own: &SideFactors,
    other: &SideFactors,
    own_tree: &ClusterTree,
    other_tree: &ClusterTree,
    plan: &ButterflyPlan,
    leaf: ClusterId,
    other_leaf: ClusterId,
) -> Result<CMatrix> {
    let half = plan.half_levels;
    let lm = plan.middle_level;
    let paired = |k: usize| -> Result<usize> {
        let o = other_tree.ancestor_at(other_leaf, lm - k)?;
        Ok(other.pos[&o])
    };
    let n_other = |slot: usize| other.levels[slot].len();
    let mut acc = own.leaves[own.pos[&leaf] * n_other(0) + paired(half)?].clone();
    for l in (0..half).rev() {
        let c = own_tree.ancestor_at(leaf, lm + l + 1)?;
        let e = &own.transfers[l][own.pos[&c] * n_other(half - l) + paired(l)?];
        acc = acc.matmul(e)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests;
