use serde::Serialize;

use super::{transfer_matrix, ButterflyFactorization};
use crate::clustering::{ClusterId, ClusterTree};
use crate::error::{Error, Result};
use crate::galerkin::Assembler;
use crate::interp::TensorGrid;
use crate::kernel::{Kernel, Side};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NestednessResidual {
    /// Largest entrywise deviation.
    pub max_abs: f64,
    /// Largest entry of the directly assembled parent moments.
    pub max_reference: f64,
    pub relative: f64,
}

/// Compares the moments of `parent` anchored at `old`, restricted to the
/// son `child`, with the son's moments anchored at `new` times the transfer
/// matrix between the two.
#[allow(clippy::too_many_arguments)]
pub fn nestedness_residual<K: Kernel + ?Sized, A: Assembler>(
    kernel: &K,
    asm: &A,
    side: Side,
    tree: &ClusterTree,
    parent: ClusterId,
    child: ClusterId,
    old: &[f64],
    new: &[f64],
    degree: usize,
) -> Result<NestednessResidual> {
    if tree.get(child)?.father != Some(parent) {
        return Err(Error::InvalidParameter(format!(
            "cluster {child} is not a son of {parent}"
        )));
    }
    let pg = TensorGrid::new(&tree.cluster(parent).bbox, degree)?;
    let cg = TensorGrid::new(&tree.cluster(child).bbox, degree)?;
    let idx = &tree.cluster(child).indices;
    let direct = asm.moments(side, idx, &pg, old, kernel);
    let e = transfer_matrix(kernel, side, &cg, &pg, old, new);
    let via_child = asm.moments(side, idx, &cg, new, kernel).matmul(&e)?;
    let max_abs = direct
        .data()
        .iter()
        .zip(via_child.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let max_reference = direct.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(NestednessResidual {
        max_abs,
        max_reference,
        relative: if max_reference > 0.0 {
            max_abs / max_reference
        } else {
            max_abs
        },
    })
}

/// Nestedness of the row basis of plan `p` between `sigma` (on level
/// `L_mid + ℓ`, `ℓ < L`) and its son, with anchors `τ` on level `L_mid - ℓ`
/// and its father.
pub fn nestedness_check<K: Kernel + ?Sized, A: Assembler>(
    fact: &ButterflyFactorization,
    kernel: &K,
    asm: &A,
    p: usize,
    sigma: ClusterId,
    son: ClusterId,
    tau: ClusterId,
) -> Result<NestednessResidual> {
    let plan = fact
        .partition()
        .plans
        .get(p)
        .ok_or_else(|| Error::InvalidParameter(format!("no plan {p}")))?;
    let (rows, cols) = (fact.row_tree(), fact.col_tree());
    let s = rows.get(sigma)?;
    let t = cols.get(tau)?;
    let depth = rows.depth();
    if !rows.is_descendant(sigma, plan.row)
        || s.level < plan.middle_level
        || s.level >= depth
        || !cols.is_descendant(tau, plan.col)
        || s.level + t.level != 2 * plan.middle_level
    {
        return Err(Error::BlockNotInPlan {
            row: sigma,
            col: tau,
        });
    }
    let father = t.father.ok_or(Error::BlockNotInPlan {
        row: sigma,
        col: tau,
    })?;
    nestedness_residual(
        kernel,
        asm,
        Side::Row,
        rows,
        sigma,
        son,
        &t.bbox.center(),
        &cols.cluster(father).center(),
        fact.degree(),
    )
}
