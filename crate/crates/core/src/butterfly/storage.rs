use serde::{Deserialize, Serialize};

use super::ButterflyFactorization;
use crate::clustering::{ClusterId, ClusterTree};
use crate::error::Result;

/// Stored complex entries by matrix family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub coupling_matrices: usize,
    pub transfer_matrices: usize,
    pub leaf_matrices: usize,
    pub dense_blocks: usize,
    pub coupling_entries: usize,
    pub transfer_entries: usize,
    pub leaf_entries: usize,
    pub dense_entries: usize,
    pub total_entries: usize,
    /// `nrows · ncols`
    pub dense_equivalent: usize,
    /// `total_entries / dense_equivalent`
    pub ratio: f64,
    /// Entry counts predicted from cluster counts alone.
    pub predicted_coupling: usize,
    pub predicted_transfer: usize,
    pub predicted_leaf: usize,
}

impl StorageReport {
    pub fn matches_prediction(&self) -> bool {
        self.coupling_entries == self.predicted_coupling
            && self.transfer_entries == self.predicted_transfer
            && self.leaf_entries == self.predicted_leaf
    }
}

fn count(t: &ClusterTree, root: ClusterId, level: usize) -> Result<usize> {
    Ok(t.descendants_at(root, level)?.len())
}

impl ButterflyFactorization {
    pub fn storage_report(&self) -> Result<StorageReport> {
        let mut r = StorageReport {
            coupling_matrices: 0,
            transfer_matrices: 0,
            leaf_matrices: 0,
            dense_blocks: self.dense.len(),
            coupling_entries: 0,
            transfer_entries: 0,
            leaf_entries: 0,
            dense_entries: self.dense.iter().map(|d| d.len()).sum(),
            total_entries: 0,
            dense_equivalent: self.nrows() * self.ncols(),
            ratio: 0.0,
            predicted_coupling: 0,
            predicted_transfer: 0,
            predicted_leaf: 0,
        };
        for f in &self.plans {
            r.coupling_matrices += f.coupling.len();
            r.coupling_entries += f.coupling.iter().map(|m| m.len()).sum::<usize>();
            for side in [&f.row, &f.col] {
                r.transfer_matrices += side.transfers.iter().map(Vec::len).sum::<usize>();
                r.transfer_entries += side
                    .transfers
                    .iter()
                    .flatten()
                    .map(|m| m.len())
                    .sum::<usize>();
                r.leaf_matrices += side.leaves.len();
                r.leaf_entries += side.leaves.iter().map(|m| m.len()).sum::<usize>();
            }
        }
        let d = self.rows.cluster(self.rows.root()).bbox.dim();
        let m = (self.degree + 1).pow(d as u32);
        let (rt, ct) = (&self.rows, &self.cols);
        for plan in &self.partition.plans {
            let (lm, half) = (plan.middle_level, plan.half_levels);
            r.predicted_coupling += count(rt, plan.row, lm)? * count(ct, plan.col, lm)? * m * m;
            for l in 0..half {
                r.predicted_transfer += (count(rt, plan.row, lm + l + 1)?
                    * count(ct, plan.col, lm - l)?
                    + count(ct, plan.col, lm + l + 1)? * count(rt, plan.row, lm - l)?)
                    * m
                    * m;
            }
            let depth = rt.depth();
            r.predicted_leaf +=
                rt.cluster(plan.row).len() * m * count(ct, plan.col, depth - 2 * half)?
                    + ct.cluster(plan.col).len() * m * count(rt, plan.row, depth - 2 * half)?;
        }
        r.total_entries =
            r.coupling_entries + r.transfer_entries + r.leaf_entries + r.dense_entries;
        r.ratio = r.total_entries as f64 / r.dense_equivalent as f64;
        Ok(r)
    }
}
