use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::AxisBox;

pub type ClusterId = usize;

const MAX_DEPTH: usize = 40;

/// Geometric description of one basis function.
#[derive(Clone, Debug)]
pub struct Support {
    /// Point used to sort the index into octree boxes.
    pub proxy: Vec<f64>,
    /// Box containing the support.
    pub bbox: AxisBox,
}

#[derive(Clone, Debug)]
pub struct Cluster {
    pub id: ClusterId,
    pub level: usize,
    /// Sorted global indices.
    pub indices: Vec<usize>,
    /// Union of the member support boxes.
    pub bbox: AxisBox,
    /// Octree cell used for subdivision.
    pub cell: AxisBox,
    pub father: Option<ClusterId>,
    pub sons: Vec<ClusterId>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.sons.is_empty()
    }

    /// Anchor point `x_σ`, the centre of the bounding box.
    pub fn center(&self) -> Vec<f64> {
        self.bbox.center()
    }
}

/// Level-uniform cluster tree: every leaf sits at depth [`ClusterTree::depth`].
#[derive(Clone, Debug)]
pub struct ClusterTree {
    clusters: Vec<Cluster>,
    levels: Vec<Vec<ClusterId>>,
    n_indices: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeStats {
    pub depth: usize,
    pub clusters_per_level: Vec<usize>,
    pub min_leaf_size: usize,
    pub max_leaf_size: usize,
}

impl ClusterTree {
    pub fn root(&self) -> ClusterId {
        0
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n_indices(&self) -> usize {
        self.n_indices
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster(&self, id: ClusterId) -> &Cluster {
        &self.clusters[id]
    }

    pub fn get(&self, id: ClusterId) -> Result<&Cluster> {
        self.clusters.get(id).ok_or(Error::UnknownCluster(id))
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn level(&self, level: usize) -> &[ClusterId] {
        self.levels.get(level).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn leaves(&self) -> &[ClusterId] {
        self.level(self.depth())
    }

    /// Ancestor of `id` at `level` (itself if the levels agree).
    pub fn ancestor_at(&self, id: ClusterId, level: usize) -> Result<ClusterId> {
        let mut c = self.get(id)?;
        if level > c.level {
            return Err(Error::InvalidParameter(format!(
                "cluster {id} at level {} has no ancestor at level {level}",
                c.level
            )));
        }
        while c.level > level {
            c = &self.clusters[c.father.expect("non-root has a father")];
        }
        Ok(c.id)
    }

    pub fn is_descendant(&self, id: ClusterId, ancestor: ClusterId) -> bool {
        let (Ok(c), Ok(a)) = (self.get(id), self.get(ancestor)) else {
            return false;
        };
        c.level >= a.level && self.ancestor_at(id, a.level).ok() == Some(ancestor)
    }

    /// All descendants of `id` at `level`, in tree order.
    pub fn descendants_at(&self, id: ClusterId, level: usize) -> Result<Vec<ClusterId>> {
        let c = self.get(id)?;
        if level < c.level || level > self.depth() {
            return Err(Error::InvalidParameter(format!(
                "level {level} outside [{}, {}]",
                c.level,
                self.depth()
            )));
        }
        let mut current = vec![id];
        for _ in c.level..level {
            current = current
                .iter()
                .flat_map(|&k| self.clusters[k].sons.iter().copied())
                .collect();
        }
        Ok(current)
    }

    pub fn stats(&self) -> TreeStats {
        let sizes = self.leaves().iter().map(|&l| self.clusters[l].len());
        TreeStats {
            depth: self.depth(),
            clusters_per_level: self.levels.iter().map(Vec::len).collect(),
            min_leaf_size: sizes.clone().min().unwrap_or(0),
            max_leaf_size: sizes.max().unwrap_or(0),
        }
    }
}

/// Builds an octree cluster tree. Every cell is bisected in all directions;
/// an index goes to the cell containing its proxy point and empty cells are
/// dropped. Subdivision of the whole level stops at the first level on which
/// some cluster holds at most `leaf_size` indices, so all leaves share one
/// depth.
pub fn build_cluster_tree(supports: &[Support], leaf_size: usize) -> Result<ClusterTree> {
    if supports.is_empty() {
        return Err(Error::DegenerateClustering("no supports".into()));
    }
    if leaf_size == 0 {
        return Err(Error::InvalidParameter("leaf size must be positive".into()));
    }
    let d = supports[0].proxy.len();
    for s in supports {
        if s.proxy.len() != d || s.bbox.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.proxy.len(),
            });
        }
    }
    let all: Vec<usize> = (0..supports.len()).collect();
    let hull = support_hull(supports, &all);
    let pad = 1e-12 * hull.diam().max(1.0);
    let proxies: Vec<&[f64]> = supports.iter().map(|s| s.proxy.as_slice()).collect();
    let root_cell = AxisBox::bounding(&proxies)?.union(&hull).padded(pad);

    let mut clusters = vec![Cluster {
        id: 0,
        level: 0,
        indices: all,
        bbox: hull.padded(pad),
        cell: root_cell,
        father: None,
        sons: Vec::new(),
    }];
    let mut levels = vec![vec![0]];
    let stop = |level: &[ClusterId], clusters: &[Cluster]| {
        level.iter().any(|&c| clusters[c].len() <= leaf_size)
    };

    while !stop(levels.last().expect("non-empty"), &clusters) {
        if levels.len() > MAX_DEPTH {
            return Err(Error::DegenerateClustering(format!(
                "no leaf reached {leaf_size} indices within {MAX_DEPTH} levels"
            )));
        }
        let level = levels.len();
        let mut next = Vec::new();
        for &parent in levels.last().expect("non-empty") {
            let cell = clusters[parent].cell.clone();
            let mid = cell.center();
            let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 1 << d];
            for &i in &clusters[parent].indices {
                let p = &supports[i].proxy;
                let oct = (0..d).fold(0, |acc, k| acc | (usize::from(p[k] >= mid[k]) << k));
                buckets[oct].push(i);
            }
            for (oct, indices) in buckets.into_iter().enumerate() {
                if indices.is_empty() {
                    continue;
                }
                let id = clusters.len();
                clusters.push(Cluster {
                    id,
                    level,
                    bbox: support_hull(supports, &indices).padded(pad),
                    indices,
                    cell: cell.octant(oct),
                    father: Some(parent),
                    sons: Vec::new(),
                });
                clusters[parent].sons.push(id);
                next.push(id);
            }
        }
        levels.push(next);
    }
    Ok(ClusterTree {
        clusters,
        levels,
        n_indices: supports.len(),
    })
}

fn support_hull(supports: &[Support], indices: &[usize]) -> AxisBox {
    let mut b = supports[indices[0]].bbox.clone();
    for &i in &indices[1..] {
        b = b.union(&supports[i].bbox);
    }
    b
}
