//! Quadrature on the reference triangle `{0 <= t <= s <= 1}` and on pairs of
//! reference triangles.
//!
//! Pair rules for triangles that share a vertex, an edge, or coincide follow
//! the Sauter–Schwab regularising transformations: the singular integrand is
//! pulled back to `[0,1]^4` where the Jacobian cancels the `1/r` singularity
//! and a tensor Gauss rule applies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "quadrature order must be positive".into(),
            ));
        }
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Collapsed tensor Gauss rule on the reference triangle; weights sum to 1/2.
/// With `n` points per direction it integrates total degree `2n - 2` exactly.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn new(n: usize) -> Result<Self> {
        let g = GaussLegendre::new(n)?;
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                points.push([u, u * v]);
                weights.push(wu * wv * u);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the product of two reference triangles; weights sum to 1/4.
#[derive(Clone, Debug)]
pub struct PairRule {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// How two panels touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairRelation {
    Identical,
    CommonEdge,
    CommonVertex,
    Disjoint,
}

impl PairRule {
    fn empty() -> Self {
        Self {
            x: Vec::new(),
            y: Vec::new(),
            weights: Vec::new(),
        }
    }

    fn push(&mut self, x: [f64; 2], y: [f64; 2], w: f64) {
        self.x.push(x);
        self.y.push(y);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Identical panels; shared vertex order.
    pub fn identical(n: usize) -> Result<Self> {
        let g = GaussLegendre::new(n)?;
        let mut r = Self::empty();
        for_each_4d(&g, |xi, e1, e2, e3, w| {
            let w = w * xi.powi(3) * e1 * e1 * e2;
            let a = [xi, xi * (1.0 - e1 + e1 * e2)];
            let b = [xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1)];
            let c = [xi, xi * e1 * (1.0 - e2 + e2 * e3)];
            let d = [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)];
            let e = [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)];
            let f = [xi, xi * e1 * (1.0 - e2)];
            for (x, y) in [(a, b), (b, a), (c, d), (d, c), (e, f), (f, e)] {
                r.push(x, y, w);
            }
        });
        Ok(r)
    }

    /// Panels sharing the edge from vertex 0 to vertex 1 in both maps.
    pub fn common_edge(n: usize) -> Result<Self> {
        let g = GaussLegendre::new(n)?;
        let mut r = Self::empty();
        for_each_4d(&g, |xi, e1, e2, e3, w| {
            let w = w * xi.powi(3) * e1 * e1;
            r.push(
                [xi, xi * e1 * e3],
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                w,
            );
            let w = w * e2;
            r.push(
                [xi, xi * e1],
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                w,
            );
            r.push(
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                [xi, xi * e1 * e2 * e3],
                w,
            );
            r.push(
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                [xi, xi * e1],
                w,
            );
            r.push(
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                [xi, xi * e1 * e2],
                w,
            );
        });
        Ok(r)
    }

    /// Panels sharing vertex 0 in both maps.
    pub fn common_vertex(n: usize) -> Result<Self> {
        let g = GaussLegendre::new(n)?;
        let mut r = Self::empty();
        for_each_4d(&g, |xi, e1, e2, e3, w| {
            let w = w * xi.powi(3) * e2;
            let a = [xi, xi * e1];
            let b = [xi * e2, xi * e2 * e3];
            r.push(a, b, w);
            r.push(b, a, w);
        });
        Ok(r)
    }
}

fn for_each_4d(g: &GaussLegendre, mut f: impl FnMut(f64, f64, f64, f64, f64)) {
    let n = g.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d];
                    f(g.points[a], g.points[b], g.points[c], g.points[d], w);
                }
            }
        }
    }
}

/// Quadrature orders used for Galerkin assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss points per direction for well-separated panels.
    pub regular_order: usize,
    /// Gauss points per direction of the singular pair rules.
    pub singular_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            regular_order: 4,
            singular_order: 4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regular_order == 0 || self.singular_order == 0 {
            return Err(Error::InvalidParameter(
                "quadrature orders must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// All rules needed for one assembly.
#[derive(Clone, Debug)]
pub struct QuadratureRules {
    pub config: QuadratureConfig,
    pub regular: TriangleRule,
    /// Doubled order for disjoint panels closer than their diameter.
    pub near: TriangleRule,
    pub identical: PairRule,
    pub common_edge: PairRule,
    pub common_vertex: PairRule,
}

impl QuadratureRules {
    pub fn new(config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            regular: TriangleRule::new(config.regular_order)?,
            near: TriangleRule::new(2 * config.regular_order)?,
            identical: PairRule::identical(config.singular_order)?,
            common_edge: PairRule::common_edge(config.singular_order)?,
            common_vertex: PairRule::common_vertex(config.singular_order)?,
        })
    }
}
