//! Galerkin matrices for piecewise-constant functions on triangle meshes.

use num_complex::Complex64;
use rayon::prelude::*;

use super::mesh::{Triangle, TriangleMesh};
use super::quadrature::{PairRelation, PairRule, QuadratureConfig, QuadratureRules, TriangleRule};
use crate::clustering::Support;
use crate::error::{Error, Result};
use crate::interp::TensorGrid;
use crate::kernel::{anchor_factor, Kernel, Side};
use crate::linalg::CMatrix;

/// Relation between two panels, detected by exact vertex equality, together
/// with both panels reordered so shared vertices come first in matching order.
pub fn classify(a: &Triangle, b: &Triangle) -> (PairRelation, Triangle, Triangle) {
    let mut shared = Vec::with_capacity(3);
    for (i, p) in a.v.iter().enumerate() {
        if let Some(j) = b.v.iter().position(|q| q == p) {
            shared.push((i, j));
        }
    }
    let rest = |used: Vec<usize>| (0..3).filter(move |k| !used.contains(k));
    match shared.len() {
        3 => {
            let mut bb = *b;
            for &(i, j) in &shared {
                bb.v[i] = b.v[j];
            }
            (PairRelation::Identical, *a, bb)
        }
        2 => {
            let (i0, j0) = shared[0];
            let (i1, j1) = shared[1];
            let ia = rest(vec![i0, i1]).next().unwrap_or(0);
            let jb = rest(vec![j0, j1]).next().unwrap_or(0);
            (
                PairRelation::CommonEdge,
                Triangle::new(a.v[i0], a.v[i1], a.v[ia]),
                Triangle::new(b.v[j0], b.v[j1], b.v[jb]),
            )
        }
        1 => {
            let (i0, j0) = shared[0];
            let ra: Vec<usize> = rest(vec![i0]).collect();
            let rb: Vec<usize> = rest(vec![j0]).collect();
            (
                PairRelation::CommonVertex,
                Triangle::new(a.v[i0], a.v[ra[0]], a.v[ra[1]]),
                Triangle::new(b.v[j0], b.v[rb[0]], b.v[rb[1]]),
            )
        }
        _ => (PairRelation::Disjoint, *a, *b),
    }
}

/// `∫_a ∫_b k(x, y) dy dx` with the rule matching how the panels touch.
pub fn quad_pair<K: Kernel + ?Sized>(
    a: &Triangle,
    b: &Triangle,
    kernel: &K,
    rules: &QuadratureRules,
) -> Result<Complex64> {
    let (relation, a, b) = classify(a, b);
    let rule = match relation {
        PairRelation::Identical => &rules.identical,
        PairRelation::CommonEdge => &rules.common_edge,
        PairRelation::CommonVertex => &rules.common_vertex,
        PairRelation::Disjoint => {
            let rule = if is_near(&a, &b) {
                &rules.near
            } else {
                &rules.regular
            };
            let pa = physical_points(&a, rule);
            let pb = physical_points(&b, rule);
            return regular_pair(&pa, &pb, kernel);
        }
    };
    singular_pair(&a, &b, rule, kernel)
}

fn is_near(a: &Triangle, b: &Triangle) -> bool {
    a.bbox().dist(&b.bbox()) < a.diam().max(b.diam())
}

fn singular_pair<K: Kernel + ?Sized>(
    a: &Triangle,
    b: &Triangle,
    rule: &PairRule,
    kernel: &K,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..rule.len() {
        let x = a.map(rule.x[k][0], rule.x[k][1]);
        let y = b.map(rule.y[k][0], rule.y[k][1]);
        sum += rule.weights[k] * kernel.eval(&x, &y)?;
    }
    Ok(4.0 * a.area() * b.area() * sum)
}

/// Quadrature points with physical weights.
pub type PanelPoints = Vec<([f64; 3], f64)>;

pub fn physical_points(t: &Triangle, rule: &TriangleRule) -> PanelPoints {
    let scale = 2.0 * t.area();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| (t.map(p[0], p[1]), scale * w))
        .collect()
}

fn regular_pair<K: Kernel + ?Sized>(
    pa: &PanelPoints,
    pb: &PanelPoints,
    kernel: &K,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, wx) in pa {
        let mut inner = Complex64::new(0.0, 0.0);
        for (y, wy) in pb {
            inner += wy * kernel.eval(x, y)?;
        }
        sum += wx * inner;
    }
    Ok(sum)
}

/// A mesh together with its quadrature data.
#[derive(Clone, Debug)]
pub struct Discretization {
    mesh: TriangleMesh,
    triangles: Vec<Triangle>,
    rules: QuadratureRules,
    points: Vec<PanelPoints>,
}

impl Discretization {
    pub fn new(mesh: TriangleMesh, config: QuadratureConfig) -> Result<Self> {
        let rules = QuadratureRules::new(config)?;
        let triangles: Vec<Triangle> = mesh.triangles().collect();
        let points = triangles
            .iter()
            .map(|t| physical_points(t, &rules.regular))
            .collect();
        Ok(Self {
            mesh,
            triangles,
            rules,
            points,
        })
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, i: usize) -> &Triangle {
        &self.triangles[i]
    }

    pub fn rules(&self) -> &QuadratureRules {
        &self.rules
    }

    /// Regular quadrature points of panel `i`.
    pub fn points(&self, i: usize) -> &PanelPoints {
        &self.points[i]
    }

    /// Proxy point (centroid) and bounding box of every basis support.
    pub fn supports(&self) -> Vec<Support> {
        self.triangles
            .iter()
            .map(|t| Support {
                proxy: t.centroid().to_vec(),
                bbox: t.bbox(),
            })
            .collect()
    }

    /// Galerkin entry `K_ij`. For symmetric kernels the pair is visited in
    /// index order so `K_ij` and `K_ji` are bit-identical.
    pub fn entry<K: Kernel + ?Sized>(&self, i: usize, j: usize, kernel: &K) -> Result<Complex64> {
        let (i, j) = if kernel.is_symmetric() && j < i {
            (j, i)
        } else {
            (i, j)
        };
        let (a, b) = (&self.triangles[i], &self.triangles[j]);
        if classify(a, b).0 == PairRelation::Disjoint && !is_near(a, b) {
            return regular_pair(&self.points[i], &self.points[j], kernel);
        }
        quad_pair(a, b, kernel, &self.rules)
    }

    /// Dense block for the given row and column indices.
    pub fn assemble_block<K: Kernel + ?Sized>(
        &self,
        rows: &[usize],
        cols: &[usize],
        kernel: &K,
    ) -> Result<CMatrix> {
        let data = rows
            .par_iter()
            .map(|&i| {
                cols.iter()
                    .map(|&j| self.entry(i, j, kernel))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CMatrix::from_vec(rows.len(), cols.len(), data.concat())
    }

    /// Full Galerkin matrix; fails before allocating if it would exceed
    /// `budget_mb` megabytes.
    pub fn assemble_dense<K: Kernel + ?Sized>(
        &self,
        kernel: &K,
        budget_mb: u64,
    ) -> Result<CMatrix> {
        let n = self.len();
        check_budget(n, budget_mb)?;
        if !kernel.is_symmetric() {
            let all: Vec<usize> = (0..n).collect();
            return self.assemble_block(&all, &all, kernel);
        }
        let upper = (0..n)
            .into_par_iter()
            .map(|i| {
                (i..n)
                    .map(|j| self.entry(i, j, kernel))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut k = CMatrix::zeros(n, n);
        for (i, row) in upper.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + off;
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
        Ok(k)
    }

    /// Phase-weighted interpolation moments
    /// `∫ E_z(x) L_p(x) φ_i(x) dx` for `i` in `indices` (row side) or
    /// `∫ E_z(y) L_q(y) φ_j(y) dy` (column side), one row per index.
    pub fn leaf_moments<K: Kernel + ?Sized>(
        &self,
        indices: &[usize],
        grid: &TensorGrid,
        anchor: &[f64],
        side: Side,
        kernel: &K,
    ) -> CMatrix {
        let m = grid.len();
        let mut out = CMatrix::zeros(indices.len(), m);
        let mut basis = vec![0.0; m];
        for (r, &i) in indices.iter().enumerate() {
            let row = out.row_mut(r);
            for (x, w) in &self.points[i] {
                let e = *w * anchor_factor(kernel, side, anchor, x);
                grid.basis_into(x, &mut basis);
                for (o, l) in row.iter_mut().zip(&basis) {
                    *o += e * l;
                }
            }
        }
        out
    }
}

/// Bytes needed by a dense complex `n × n` matrix.
pub fn dense_bytes(n: usize) -> u64 {
    (n as u64) * (n as u64) * 16
}

pub fn check_budget(n: usize, budget_mb: u64) -> Result<()> {
    let needed = dense_bytes(n);
    if needed > budget_mb.saturating_mul(1 << 20) {
        return Err(Error::BudgetExceeded {
            n,
            needed_mb: needed.div_ceil(1 << 20),
            budget_mb,
        });
    }
    Ok(())
}
