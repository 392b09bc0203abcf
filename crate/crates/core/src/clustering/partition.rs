use std::collections::HashMap;

use serde::Serialize;

use super::tree::{ClusterId, ClusterTree};
use crate::error::{Error, Result};
use crate::interp::AxisBox;

/// `max(diam σ, diam τ) <= η1 · dist(σ, τ)`
pub fn standard_admissible(a: &AxisBox, b: &AxisBox, eta1: f64) -> bool {
    a.diam().max(b.diam()) <= eta1 * a.dist(b)
}

/// Butterfly layout of one admissible block `σ̂ × τ̂` at level `ℓ`.
///
/// With `L = ⌊(depth - ℓ) / 2⌋` and `L_mid = depth - L`, the middle blocks
/// are all pairs of descendants of `σ̂` and `τ̂` on level `L_mid`.
#[derive(Clone, Debug, Serialize)]
pub struct ButterflyPlan {
    pub row: ClusterId,
    pub col: ClusterId,
    pub level: usize,
    pub half_levels: usize,
    pub middle_level: usize,
    pub middle_blocks: Vec<(ClusterId, ClusterId)>,
}

impl ButterflyPlan {
    /// Level of slot `k` in `0..=2L`, i.e. `L_mid - L + k`.
    pub fn slot_level(&self, slot: usize) -> usize {
        self.middle_level - self.half_levels + slot
    }
}

#[derive(Clone, Debug)]
pub struct BlockPartition {
    pub eta1: f64,
    /// Parabolic leaves `(σ, τ, plan)`.
    pub admissible: Vec<(ClusterId, ClusterId, usize)>,
    pub inadmissible: Vec<(ClusterId, ClusterId)>,
    pub plans: Vec<ButterflyPlan>,
    plan_of_block: HashMap<(ClusterId, ClusterId), usize>,
}

impl BlockPartition {
    /// Plan whose block `σ̂ × τ̂` contains `(row, col)`.
    pub fn plan_containing(
        &self,
        rows: &ClusterTree,
        cols: &ClusterTree,
        row: ClusterId,
        col: ClusterId,
    ) -> Option<usize> {
        let (r, c) = (rows.get(row).ok()?, cols.get(col).ok()?);
        let top = r.level.min(c.level);
        for level in (0..=top).rev() {
            let key = (
                rows.ancestor_at(row, level).ok()?,
                cols.ancestor_at(col, level).ok()?,
            );
            if let Some(&p) = self.plan_of_block.get(&key) {
                return Some(p);
            }
        }
        None
    }

    /// `Σ |σ||τ|` over all leaves.
    pub fn covered_entries(&self, rows: &ClusterTree, cols: &ClusterTree) -> usize {
        let size = |t: &ClusterTree, c: ClusterId| t.cluster(c).len();
        self.admissible
            .iter()
            .map(|&(s, t, _)| size(rows, s) * size(cols, t))
            .chain(
                self.inadmissible
                    .iter()
                    .map(|&(s, t)| size(rows, s) * size(cols, t)),
            )
            .sum()
    }
}

/// Recursive partition of `root × root`. Admissible pairs become butterfly
/// plans; non-admissible pairs of leaves become dense blocks.
pub fn build_block_partition(
    rows: &ClusterTree,
    cols: &ClusterTree,
    eta1: f64,
) -> Result<BlockPartition> {
    if rows.depth() != cols.depth() {
        return Err(Error::TreeDepthMismatch {
            row: rows.depth(),
            col: cols.depth(),
        });
    }
    if !(eta1.is_finite() && eta1 > 0.0) {
        return Err(Error::InvalidParameter(format!("eta1 = {eta1}")));
    }
    let mut part = BlockPartition {
        eta1,
        admissible: Vec::new(),
        inadmissible: Vec::new(),
        plans: Vec::new(),
        plan_of_block: HashMap::new(),
    };
    let mut stack = vec![(rows.root(), cols.root())];
    while let Some((s, t)) = stack.pop() {
        let (cs, ct) = (rows.cluster(s), cols.cluster(t));
        if standard_admissible(&cs.bbox, &ct.bbox, eta1) {
            let plan = make_plan(rows, cols, s, t)?;
            let id = part.plans.len();
            part.admissible
                .extend(plan.middle_blocks.iter().map(|&(a, b)| (a, b, id)));
            part.plan_of_block.insert((s, t), id);
            part.plans.push(plan);
        } else if cs.is_leaf() || ct.is_leaf() {
            part.inadmissible.push((s, t));
        } else {
            for &a in cs.sons.iter().rev() {
                for &b in ct.sons.iter().rev() {
                    stack.push((a, b));
                }
            }
        }
    }
    Ok(part)
}

fn make_plan(
    rows: &ClusterTree,
    cols: &ClusterTree,
    s: ClusterId,
    t: ClusterId,
) -> Result<ButterflyPlan> {
    let level = rows.cluster(s).level;
    let depth = rows.depth();
    let half = (depth - level) / 2;
    let middle = depth - half;
    let rs = rows.descendants_at(s, middle)?;
    let ct = cols.descendants_at(t, middle)?;
    let middle_blocks = rs
        .iter()
        .flat_map(|&a| ct.iter().map(move |&b| (a, b)))
        .collect();
    Ok(ButterflyPlan {
        row: s,
        col: t,
        level,
        half_levels: half,
        middle_level: middle,
        middle_blocks,
    })
}

/// Ancestor chains and descendant sets driving one middle block.
#[derive(Clone, Debug)]
pub struct ClusterSequence {
    /// `σ_0, σ_{-1}, …, σ_{-L}`
    pub row_ancestors: Vec<ClusterId>,
    /// `τ_0, τ_{-1}, …, τ_{-L}`
    pub col_ancestors: Vec<ClusterId>,
    /// Entry `k - 1` holds all descendants of `σ_0` on level `L_mid + k`.
    pub row_descendants: Vec<Vec<ClusterId>>,
    pub col_descendants: Vec<Vec<ClusterId>>,
}

pub fn cluster_sequence(
    rows: &ClusterTree,
    cols: &ClusterTree,
    plan: &ButterflyPlan,
    block: (ClusterId, ClusterId),
) -> Result<ClusterSequence> {
    if !plan.middle_blocks.contains(&block) {
        return Err(Error::BlockNotInPlan {
            row: block.0,
            col: block.1,
        });
    }
    let chain = |t: &ClusterTree, c: ClusterId| -> Result<Vec<ClusterId>> {
        (0..=plan.half_levels)
            .map(|k| t.ancestor_at(c, plan.middle_level - k))
            .collect()
    };
    let below = |t: &ClusterTree, c: ClusterId| -> Result<Vec<Vec<ClusterId>>> {
        (1..=plan.half_levels)
            .map(|k| t.descendants_at(c, plan.middle_level + k))
            .collect()
    };
    Ok(ClusterSequence {
        row_ancestors: chain(rows, block.0)?,
        col_ancestors: chain(cols, block.1)?,
        row_descendants: below(rows, block.0)?,
        col_descendants: below(cols, block.1)?,
    })
}

/// Outcome of checking `κ · diam σ' · diam τ' <= η2 · dist(σ̂, τ̂)` over all
/// paired levels of every plan.
#[derive(Clone, Debug, Serialize)]
pub struct Eta2Report {
    /// Smallest `η2` for which the condition holds everywhere.
    pub eta2_min: f64,
    /// Largest per-direction son/father diameter ratio inside plan subtrees.
    pub q_bar: f64,
    pub eta2: f64,
    pub satisfied: bool,
}

pub fn check_assumption_eta2(
    rows: &ClusterTree,
    cols: &ClusterTree,
    partition: &BlockPartition,
    kappa: f64,
    eta2: f64,
) -> Result<Eta2Report> {
    let mut eta2_min: f64 = 0.0;
    let mut q_bar: f64 = 0.0;
    for plan in &partition.plans {
        let dist = rows
            .cluster(plan.row)
            .bbox
            .dist(&cols.cluster(plan.col).bbox);
        let max_diam = |t: &ClusterTree, root: ClusterId, level: usize| -> Result<f64> {
            Ok(t.descendants_at(root, level)?
                .iter()
                .map(|&c| t.cluster(c).bbox.diam())
                .fold(0.0, f64::max))
        };
        let l = plan.half_levels;
        for i in 0..=2 * l {
            let rl = plan.slot_level(i);
            let cl = plan.slot_level(2 * l - i);
            let prod = max_diam(rows, plan.row, rl)? * max_diam(cols, plan.col, cl)?;
            if kappa > 0.0 {
                eta2_min = eta2_min.max(kappa * prod / dist);
            }
        }
        for (t, root) in [(rows, plan.row), (cols, plan.col)] {
            for level in plan.slot_level(0)..plan.slot_level(2 * l) {
                for c in t.descendants_at(root, level)? {
                    let father = &t.cluster(c).bbox;
                    for &s in &t.cluster(c).sons {
                        let son = &t.cluster(s).bbox;
                        for k in 0..son.dim() {
                            q_bar = q_bar.max(son.extent(k) / father.extent(k));
                        }
                    }
                }
            }
        }
    }
    Ok(Eta2Report {
        eta2_min,
        q_bar,
        eta2,
        satisfied: eta2_min <= eta2,
    })
}

/// Summary of a partition suitable for JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionStats {
    pub n: usize,
    pub depth: usize,
    pub eta1: f64,
    pub plans: usize,
    pub parabolic_leaves: usize,
    pub inadmissible_leaves: usize,
    /// Number of plans by half level count `L`.
    pub plans_by_half_levels: Vec<usize>,
    pub plans_by_level: Vec<usize>,
    pub covered_entries: usize,
}

pub fn partition_stats(
    rows: &ClusterTree,
    cols: &ClusterTree,
    p: &BlockPartition,
) -> PartitionStats {
    let mut by_half = vec![0; rows.depth() / 2 + 1];
    let mut by_level = vec![0; rows.depth() + 1];
    for plan in &p.plans {
        by_half[plan.half_levels] += 1;
        by_level[plan.level] += 1;
    }
    PartitionStats {
        n: rows.n_indices(),
        depth: rows.depth(),
        eta1: p.eta1,
        plans: p.plans.len(),
        parabolic_leaves: p.admissible.len(),
        inadmissible_leaves: p.inadmissible.len(),
        plans_by_half_levels: by_half,
        plans_by_level: by_level,
        covered_entries: p.covered_entries(rows, cols),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{build_cluster_tree, Support};

    fn line_tree(n: usize) -> ClusterTree {
        let s: Vec<Support> = (0..n)
            .map(|k| {
                let x = k as f64;
                Support {
                    proxy: vec![x + 0.5],
                    bbox: AxisBox::new(vec![x], vec![x + 1.0]).unwrap(),
                }
            })
            .collect();
        build_cluster_tree(&s, 1).unwrap()
    }

    #[test]
    fn touching_boxes_not_admissible() {
        let a = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let b = AxisBox::new(vec![1.0], vec![2.0]).unwrap();
        assert!(!standard_admissible(&a, &b, 10.0));
        let c = AxisBox::new(vec![3.0], vec![4.0]).unwrap();
        assert!(standard_admissible(&a, &c, 0.5));
        assert!(!standard_admissible(&a, &c, 0.4));
    }

    #[test]
    fn cover_is_disjoint_and_complete() {
        let t = line_tree(64);
        let p = build_block_partition(&t, &t, 1.0).unwrap();
        assert_eq!(p.covered_entries(&t, &t), 64 * 64);
        let mut seen = vec![false; 64 * 64];
        let mut mark = |s: ClusterId, c: ClusterId| {
            for &i in &t.cluster(s).indices {
                for &j in &t.cluster(c).indices {
                    assert!(!seen[i * 64 + j]);
                    seen[i * 64 + j] = true;
                }
            }
        };
        for &(s, c, _) in &p.admissible {
            mark(s, c);
        }
        for &(s, c) in &p.inadmissible {
            mark(s, c);
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn plan_levels_and_sequences() {
        let t = line_tree(64);
        let p = build_block_partition(&t, &t, 1.0).unwrap();
        assert!(p.plans.iter().any(|pl| pl.half_levels >= 1));
        for (id, plan) in p.plans.iter().enumerate() {
            assert_eq!(plan.middle_level, t.depth() - plan.half_levels);
            assert_eq!(plan.half_levels, (t.depth() - plan.level) / 2);
            let blk = plan.middle_blocks[0];
            let seq = cluster_sequence(&t, &t, plan, blk).unwrap();
            assert_eq!(seq.row_ancestors.len(), plan.half_levels + 1);
            let top = *seq.row_ancestors.last().unwrap();
            assert_eq!(t.cluster(top).level, plan.slot_level(0));
            assert!(t.is_descendant(top, plan.row));
            assert_eq!(p.plan_containing(&t, &t, blk.0, blk.1), Some(id));
        }
        let plan = &p.plans[0];
        let other = p.plans[1].middle_blocks[0];
        assert!(matches!(
            cluster_sequence(&t, &t, plan, other),
            Err(Error::BlockNotInPlan { .. })
        ));
    }

    #[test]
    fn zero_wavenumber_needs_no_eta2() {
        let t = line_tree(32);
        let p = build_block_partition(&t, &t, 1.0).unwrap();
        let r = check_assumption_eta2(&t, &t, &p, 0.0, 1.0).unwrap();
        assert_eq!(r.eta2_min, 0.0);
        assert!(r.satisfied);
        assert!(r.q_bar <= 1.0);
    }
}
