//! Tensor-product Chebyshev interpolation on axis-parallel boxes.
//!
//! Nodes are the Chebyshev points of the first kind mapped to each interval
//! and sorted ascending. Lagrange polynomials are evaluated with the second
//! barycentric formula. Multi-indices are flattened with the first
//! coordinate varying fastest: `p = Σ p_i (m+1)^i`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[a, b]` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// Affine map onto `[-1, 1]`.
    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn from_reference(&self, t: f64) -> f64 {
        self.center() + self.half_width() * t
    }
}

/// Axis-parallel box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    /// Requires `lo[i] < hi[i]` in every direction.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = Self::new_closed(lo, hi)?;
        if let Some(i) = (0..b.dim()).find(|&i| b.lo[i] >= b.hi[i]) {
            return Err(Error::InvalidBox(format!(
                "empty extent in direction {i}: [{}, {}]",
                b.lo[i], b.hi[i]
            )));
        }
        Ok(b)
    }

    /// Like [`AxisBox::new`] but allows `lo[i] == hi[i]`.
    pub fn new_closed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        for i in 0..lo.len() {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] <= hi[i]) {
                return Err(Error::InvalidBox(format!(
                    "bad extent in direction {i}: [{}, {}]",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn from_intervals(intervals: &[Interval]) -> Result<Self> {
        Self::new(
            intervals.iter().map(Interval::lower).collect(),
            intervals.iter().map(Interval::upper).collect(),
        )
    }

    /// Smallest closed box containing all points.
    pub fn bounding(points: &[&[f64]]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySample)?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in &points[1..] {
            if p.len() != lo.len() {
                return Err(Error::DimensionMismatch {
                    expected: lo.len(),
                    got: p.len(),
                });
            }
            for i in 0..lo.len() {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Self::new_closed(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn extent(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn interval(&self, i: usize) -> Result<Interval> {
        Interval::new(self.lo[i], self.hi[i])
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Euclidean diameter.
    pub fn diam(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.extent(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance between the two boxes, zero if they intersect.
    pub fn dist(&self, other: &AxisBox) -> f64 {
        (0..self.dim())
            .map(|i| {
                let gap = (other.lo[i] - self.hi[i]).max(self.lo[i] - other.hi[i]);
                gap.max(0.0).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .enumerate()
            .all(|(i, &x)| self.lo[i] - tol <= x && x <= self.hi[i] + tol)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn union(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            lo: self
                .lo
                .iter()
                .zip(&other.lo)
                .map(|(a, b)| a.min(*b))
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(&other.hi)
                .map(|(a, b)| a.max(*b))
                .collect(),
        }
    }

    /// Grows every extent below `min_extent` symmetrically to `min_extent`.
    pub fn padded(&self, min_extent: f64) -> AxisBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..lo.len() {
            let w = hi[i] - lo[i];
            if w < min_extent {
                let c = 0.5 * (lo[i] + hi[i]);
                lo[i] = c - 0.5 * min_extent;
                hi[i] = c + 0.5 * min_extent;
            }
        }
        AxisBox { lo, hi }
    }

    /// Child obtained by bisecting every direction; bit `i` of `octant`
    /// selects the upper half in direction `i`.
    pub fn octant(&self, octant: usize) -> AxisBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..lo.len() {
            let mid = 0.5 * (lo[i] + hi[i]);
            if octant >> i & 1 == 1 {
                lo[i] = mid;
            } else {
                hi[i] = mid;
            }
        }
        AxisBox { lo, hi }
    }
}

/// Chebyshev nodes of degree `m` on an interval with barycentric weights.
#[derive(Clone, Debug)]
pub struct ChebGrid1D {
    interval: Interval,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebGrid1D {
    pub fn new(degree: usize, interval: Interval) -> Self {
        let m = degree;
        let denom = (2 * m + 2) as f64;
        let mut nodes = Vec::with_capacity(m + 1);
        let mut weights = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let j = m - k;
            let theta = (2 * j + 1) as f64 * PI / denom;
            // cos θ written as a sine so the nodes are exactly symmetric
            let t = ((m as f64 - 2.0 * j as f64) * PI / denom).sin();
            nodes.push(interval.from_reference(t));
            let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            weights.push(sign * theta.sin());
        }
        Self {
            interval,
            nodes,
            weights,
        }
    }

    /// Nodes on the reference interval `[-1, 1]`.
    pub fn reference(degree: usize) -> Self {
        Self::new(degree, Interval { a: -1.0, b: 1.0 })
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Writes `L_j(x)` for all `j` into `out`.
    pub fn basis_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.nodes.len());
        if let Some(k) = self.nodes.iter().position(|&n| n == x) {
            out.fill(0.0);
            out[k] = 1.0;
            return;
        }
        let mut sum = 0.0;
        for ((o, &n), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *o = w / (x - n);
            sum += *o;
        }
        for o in out.iter_mut() {
            *o /= sum;
        }
    }

    pub fn basis(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        self.basis_into(x, &mut out);
        out
    }

    pub fn lagrange(&self, j: usize, x: f64) -> f64 {
        self.basis(x)[j]
    }
}

/// Tensor Chebyshev grid of degree `m` on a box.
#[derive(Clone, Debug)]
pub struct TensorGrid {
    bbox: AxisBox,
    axes: Vec<ChebGrid1D>,
    points: Vec<f64>,
}

impl TensorGrid {
    pub fn new(bbox: &AxisBox, degree: usize) -> Result<Self> {
        let d = bbox.dim();
        let axes = (0..d)
            .map(|i| Ok(ChebGrid1D::new(degree, bbox.interval(i)?)))
            .collect::<Result<Vec<_>>>()?;
        let n1 = degree + 1;
        let total = n1.pow(d as u32);
        let mut points = Vec::with_capacity(total * d);
        for p in 0..total {
            let mut rest = p;
            for ax in &axes {
                points.push(ax.nodes[rest % n1]);
                rest /= n1;
            }
        }
        Ok(Self {
            bbox: bbox.clone(),
            axes,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn degree(&self) -> usize {
        self.axes[0].degree()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> &AxisBox {
        &self.bbox
    }

    pub fn axes(&self) -> &[ChebGrid1D] {
        &self.axes
    }

    pub fn point(&self, p: usize) -> &[f64] {
        let d = self.dim();
        &self.points[p * d..(p + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim())
    }

    /// Flat index of a multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let n1 = self.degree() + 1;
        multi.iter().rev().fold(0, |acc, &k| acc * n1 + k)
    }

    /// Writes `L_p(x)` for all tensor indices `p` into `out`.
    pub fn basis_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let n1 = self.degree() + 1;
        debug_assert_eq!(x.len(), d);
        debug_assert_eq!(out.len(), self.len());
        let mut one_d = vec![0.0; d * n1];
        for (i, ax) in self.axes.iter().enumerate() {
            ax.basis_into(x[i], &mut one_d[i * n1..(i + 1) * n1]);
        }
        out[..n1].copy_from_slice(&one_d[..n1]);
        let mut filled = n1;
        for i in 1..d {
            let row = &one_d[i * n1..(i + 1) * n1];
            for k in (0..n1).rev() {
                for q in 0..filled {
                    out[k * filled + q] = out[q] * row[k];
                }
            }
            filled *= n1;
        }
    }

    pub fn basis(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.basis_into(x, &mut out);
        out
    }
}

/// Interpolant `Σ_p f(ξ_p) L_p(x)` stored by its nodal values.
#[derive(Clone, Debug)]
pub struct TensorInterpolant {
    grid: TensorGrid,
    values: Vec<Complex64>,
}

impl TensorInterpolant {
    /// Samples `f` at the grid nodes; the first failure is returned.
    pub fn try_new<F, E>(bbox: &AxisBox, degree: usize, mut f: F) -> std::result::Result<Self, E>
    where
        F: FnMut(&[f64]) -> std::result::Result<Complex64, E>,
        E: From<Error>,
    {
        let grid = TensorGrid::new(bbox, degree)?;
        let values = grid
            .points()
            .map(&mut f)
            .collect::<std::result::Result<_, E>>()?;
        Ok(Self { grid, values })
    }

    pub fn new<F>(bbox: &AxisBox, degree: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        Self::try_new(bbox, degree, |x| Ok::<_, Error>(f(x)))
    }

    pub fn from_values(grid: TensorGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let basis = self.grid.basis(x);
        basis.iter().zip(&self.values).map(|(l, v)| v * l).sum()
    }
}

/// Lebesgue constant of the degree-`m` Chebyshev interpolant on `[-1, 1]`,
/// sampled on `10 (m+1)^2` equispaced points including both endpoints.
pub fn lebesgue_constant(degree: usize) -> f64 {
    lebesgue_constant_sampled(degree, 10 * (degree + 1).pow(2))
}

pub fn lebesgue_constant_sampled(degree: usize, samples: usize) -> f64 {
    let grid = ChebGrid1D::reference(degree);
    let n = samples.max(2);
    let mut basis = vec![0.0; degree + 1];
    (0..n)
        .map(|k| {
            let x = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
            grid.basis_into(x, &mut basis);
            basis.iter().map(|l| l.abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}
