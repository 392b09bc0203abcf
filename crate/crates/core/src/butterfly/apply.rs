use num_complex::Complex64;
use rayon::prelude::*;

use super::{ButterflyFactorization, PlanFactors, SideFactors};
use crate::clustering::ClusterTree;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, LinearOperator};

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

fn gather(x: &[Complex64], idx: &[usize]) -> Vec<Complex64> {
    idx.iter().map(|&i| x[i]).collect()
}

struct Pass<'a> {
    up: &'a SideFactors,
    down: &'a SideFactors,
    up_tree: &'a ClusterTree,
    down_tree: &'a ClusterTree,
    half: usize,
}

impl Pass<'_> {
    fn n_up(&self, slot: usize) -> usize {
        self.up.levels[slot].len()
    }

    fn n_down(&self, slot: usize) -> usize {
        self.down.levels[slot].len()
    }

    /// Coefficients `w[u * n_down + d]` for `u` in up-slot `L` and `d` in
    /// down-slot `L`.
    fn upward(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let h = self.half;
        let nd0 = self.n_down(0);
        let mut w: Vec<Vec<Complex64>> = Vec::with_capacity(self.n_up(2 * h) * nd0);
        for &u in &self.up.levels[2 * h] {
            let xs = gather(x, &self.up_tree.cluster(u).indices);
            for d in 0..nd0 {
                let leaf = &self.up.leaves[self.up.pos[&u] * nd0 + d];
                let mut acc = zeros(leaf.cols());
                leaf.gemv_t_acc(&xs, &mut acc);
                w.push(acc);
            }
        }
        for l in (0..h).rev() {
            let nd = self.n_down(h - l);
            let nd_father = self.n_down(h - l - 1);
            let mut next = Vec::with_capacity(self.n_up(h + l) * nd);
            for &u in &self.up.levels[h + l] {
                let sons = &self.up_tree.cluster(u).sons;
                for &d in &self.down.levels[h - l] {
                    let df = self.down.pos[&self.down_tree.cluster(d).father.expect("below root")];
                    let di = self.down.pos[&d];
                    let mut acc: Option<Vec<Complex64>> = None;
                    for &c in sons {
                        let ci = self.up.pos[&c];
                        let e = &self.up.transfers[l][ci * nd + di];
                        let a = acc.get_or_insert_with(|| zeros(e.cols()));
                        e.gemv_t_acc(&w[ci * nd_father + df], a);
                    }
                    next.push(acc.expect("non-leaf has sons"));
                }
            }
            w = next;
        }
        w
    }

    /// Consumes `h[d * n_up + u]` for `d` in down-slot `L`, `u` in up-slot
    /// `L` and scatters the leaf results into `y`.
    fn downward(&self, mut h: Vec<Vec<Complex64>>, y: &mut [Complex64]) {
        let half = self.half;
        for l in 0..half {
            let nu = self.n_up(half - l);
            let mut next = Vec::with_capacity(self.n_down(half + l + 1) * self.n_up(half - l - 1));
            for &c in &self.down.levels[half + l + 1] {
                let ci = self.down.pos[&c];
                let cf = self.down.pos[&self.down_tree.cluster(c).father.expect("below root")];
                for &o in &self.up.levels[half - l - 1] {
                    let mut acc: Option<Vec<Complex64>> = None;
                    for &s in &self.up_tree.cluster(o).sons {
                        let si = self.up.pos[&s];
                        let e = &self.down.transfers[l][ci * nu + si];
                        let a = acc.get_or_insert_with(|| zeros(e.rows()));
                        e.gemv_acc(&h[cf * nu + si], a);
                    }
                    next.push(acc.expect("non-leaf has sons"));
                }
            }
            h = next;
        }
        let nu0 = self.n_up(0);
        for &leaf in &self.down.levels[2 * half] {
            let li = self.down.pos[&leaf];
            let idx = &self.down_tree.cluster(leaf).indices;
            let mut out = zeros(idx.len());
            for o in 0..nu0 {
                self.down.leaves[li * nu0 + o].gemv_acc(&h[li * nu0 + o], &mut out);
            }
            for (&i, v) in idx.iter().zip(out) {
                y[i] += v;
            }
        }
    }
}

fn apply_plan(
    f: &PlanFactors,
    rows: &ClusterTree,
    cols: &ClusterTree,
    transpose: bool,
    x: &[Complex64],
    y: &mut [Complex64],
) {
    let pass = if transpose {
        Pass {
            up: &f.row,
            down: &f.col,
            up_tree: rows,
            down_tree: cols,
            half: f.half,
        }
    } else {
        Pass {
            up: &f.col,
            down: &f.row,
            up_tree: cols,
            down_tree: rows,
            half: f.half,
        }
    };
    let w = pass.upward(x);
    let nu = pass.n_up(f.half);
    let nd = pass.n_down(f.half);
    let n_col = f.col.levels[f.half].len();
    let mut h = Vec::with_capacity(nd * nu);
    for d in 0..nd {
        for u in 0..nu {
            let coeff = &w[u * nd + d];
            let s = if transpose {
                let s = &f.coupling[u * n_col + d];
                let mut acc = zeros(s.cols());
                s.gemv_t_acc(coeff, &mut acc);
                acc
            } else {
                f.coupling[d * n_col + u].matvec(coeff)
            };
            h.push(s);
        }
    }
    pass.downward(h, y);
}

impl ButterflyFactorization {
    fn apply_impl(&self, x: &[Complex64], transpose: bool) -> Result<Vec<Complex64>> {
        let (n_in, n_out) = if transpose {
            (self.nrows(), self.ncols())
        } else {
            (self.ncols(), self.nrows())
        };
        if x.len() != n_in {
            return Err(Error::DimensionMismatch {
                expected: n_in,
                got: x.len(),
            });
        }
        let mut y = self
            .plans
            .par_iter()
            .fold(
                || zeros(n_out),
                |mut acc, f| {
                    apply_plan(f, &self.rows, &self.cols, transpose, x, &mut acc);
                    acc
                },
            )
            .reduce(
                || zeros(n_out),
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                    a
                },
            );
        for (k, &(s, t)) in self.partition.inadmissible.iter().enumerate() {
            let (ri, ci) = (&self.rows.cluster(s).indices, &self.cols.cluster(t).indices);
            let d = &self.dense[k];
            let (src, dst) = if transpose { (ri, ci) } else { (ci, ri) };
            let xs = gather(x, src);
            let mut out = zeros(dst.len());
            if transpose {
                d.gemv_t_acc(&xs, &mut out);
            } else {
                d.gemv_acc(&xs, &mut out);
            }
            for (&i, v) in dst.iter().zip(out) {
                y[i] += v;
            }
        }
        Ok(y)
    }

    /// `K̃ x`
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_impl(x, false)
    }

    /// `K̃ᵀ x`
    pub fn matvec_transpose(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_impl(x, true)
    }

    /// `K̃ x` evaluated chain by chain through [`Self::block_dense`].
    pub fn matvec_by_blocks(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        let mut y = zeros(self.nrows());
        let mut add = |rows: &[usize], cols: &[usize], b: &CMatrix| {
            let out = b.matvec(&gather(x, cols));
            for (&i, v) in rows.iter().zip(out) {
                y[i] += v;
            }
        };
        for p in 0..self.plans.len() {
            for (s, t) in self.leaf_pairs(p) {
                let b = self.block_dense(s, t)?;
                add(
                    &self.rows.cluster(s).indices,
                    &self.cols.cluster(t).indices,
                    &b,
                );
            }
        }
        for (k, &(s, t)) in self.partition.inadmissible.iter().enumerate() {
            add(
                &self.rows.cluster(s).indices,
                &self.cols.cluster(t).indices,
                &self.dense[k],
            );
        }
        Ok(y)
    }

    /// Assembles `K̃` densely.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let mut k = CMatrix::zeros(self.nrows(), self.ncols());
        let mut put = |rows: &[usize], cols: &[usize], b: &CMatrix| {
            for (a, &i) in rows.iter().enumerate() {
                for (c, &j) in cols.iter().enumerate() {
                    k.set(i, j, b.get(a, c));
                }
            }
        };
        for p in 0..self.plans.len() {
            for (s, t) in self.leaf_pairs(p) {
                let b = self.block_dense(s, t)?;
                put(
                    &self.rows.cluster(s).indices,
                    &self.cols.cluster(t).indices,
                    &b,
                );
            }
        }
        for (k, &(s, t)) in self.partition.inadmissible.iter().enumerate() {
            put(
                &self.rows.cluster(s).indices,
                &self.cols.cluster(t).indices,
                &self.dense[k],
            );
        }
        Ok(k)
    }
}

impl LinearOperator for ButterflyFactorization {
    fn nrows(&self) -> usize {
        ButterflyFactorization::nrows(self)
    }

    fn ncols(&self) -> usize {
        ButterflyFactorization::ncols(self)
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matvec(x)
    }

    fn apply_transpose(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matvec_transpose(x)
    }
}
