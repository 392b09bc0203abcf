use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stability::growth_error;
use crate::error::{Error, Result};
use crate::interp::{AxisBox, TensorGrid, TensorInterpolant};
use crate::kernel::{anchor_factor, Kernel, Side};
use crate::linalg::CMatrix;

/// Default number of sample points per direction.
pub const DEFAULT_SAMPLES: usize = 32;

/// `n^d` equispaced points of a box, both ends included.
pub fn sample_grid(bbox: &AxisBox, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let d = bbox.dim();
    let total = n.pow(d as u32);
    let coord = |i: usize, k: usize| {
        if n == 1 {
            (bbox.lo()[i] + bbox.hi()[i]) / 2.0
        } else {
            bbox.lo()[i] + bbox.extent(i) * k as f64 / (n - 1) as f64
        }
    };
    Ok((0..total)
        .map(|p| {
            let mut rest = p;
            (0..d)
                .map(|i| {
                    let k = rest % n;
                    rest /= n;
                    coord(i, k)
                })
                .collect()
        })
        .collect())
}

/// Largest per-direction ratio `extent(B_{ℓ+1}) / extent(B_ℓ)`; fails unless
/// the boxes are nested and every ratio is below one.
pub fn shrinking_factor(boxes: &[AxisBox]) -> Result<f64> {
    let d = boxes.first().ok_or(Error::EmptySample)?.dim();
    let mut q = 0.0f64;
    for (l, w) in boxes.windows(2).enumerate() {
        if w[1].dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: w[1].dim(),
            });
        }
        let tol = 1e-12 * w[0].diam().max(1.0);
        let nested = (0..d)
            .all(|i| w[1].lo()[i] >= w[0].lo()[i] - tol && w[1].hi()[i] <= w[0].hi()[i] + tol);
        if !nested {
            return Err(Error::InvalidBox(format!(
                "box {} is not inside box {l}",
                l + 1
            )));
        }
        for i in 0..d {
            let r = w[1].extent(i) / w[0].extent(i);
            if r >= 1.0 {
                return Err(Error::InvalidBox(format!(
                    "shrinking violated between boxes {l} and {} in direction {i}",
                    l + 1
                )));
            }
            q = q.max(r);
        }
    }
    Ok(q)
}

/// The composition `𝕴_L ∘ ⋯ ∘ 𝕴_0` of re-interpolation operators on nested
/// boxes `B_ℓ` with anchors `z_ℓ`, stored as the transfers between
/// consecutive node sets.
pub struct ReinterpolationChain<'k, K: ?Sized> {
    kernel: &'k K,
    side: Side,
    grids: Vec<TensorGrid>,
    anchors: Vec<Vec<f64>>,
    /// `transfers[ℓ - 1][q, p] = E_{ℓ-1}(ξ^ℓ_q) L^{ℓ-1}_p(ξ^ℓ_q) / E_{ℓ-1}(ξ^{ℓ-1}_p)`
    transfers: Vec<CMatrix>,
}

impl<'k, K: Kernel + ?Sized> ReinterpolationChain<'k, K> {
    pub fn new(
        kernel: &'k K,
        side: Side,
        boxes: &[AxisBox],
        anchors: &[Vec<f64>],
        degree: usize,
    ) -> Result<Self> {
        if boxes.len() != anchors.len() {
            return Err(Error::DimensionMismatch {
                expected: boxes.len(),
                got: anchors.len(),
            });
        }
        if let Some(a) = anchors.iter().find(|a| a.len() != boxes[0].dim()) {
            return Err(Error::DimensionMismatch {
                expected: boxes[0].dim(),
                got: a.len(),
            });
        }
        shrinking_factor(boxes)?;
        let grids = boxes
            .iter()
            .map(|b| TensorGrid::new(b, degree))
            .collect::<Result<Vec<_>>>()?;
        let transfers = (1..grids.len())
            .map(|l| {
                let (parent, child, z) = (&grids[l - 1], &grids[l], &anchors[l - 1]);
                let denom: Vec<Complex64> = parent
                    .points()
                    .map(|p| anchor_factor(kernel, side, z, p))
                    .collect();
                let mut basis = vec![0.0; parent.len()];
                let mut t = CMatrix::zeros(child.len(), parent.len());
                for (q, xi) in child.points().enumerate() {
                    parent.basis_into(xi, &mut basis);
                    let e = anchor_factor(kernel, side, z, xi);
                    for ((o, l), dn) in t.row_mut(q).iter_mut().zip(&basis).zip(&denom) {
                        *o = e * *l / dn;
                    }
                }
                t
            })
            .collect();
        Ok(Self {
            kernel,
            side,
            grids,
            anchors: anchors.to_vec(),
            transfers,
        })
    }

    /// Number of operators minus one.
    pub fn levels(&self) -> usize {
        self.grids.len() - 1
    }

    pub fn grids(&self) -> &[TensorGrid] {
        &self.grids
    }

    /// Nodes of `B_0` at which the input function is sampled.
    pub fn input_nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.grids[0].points()
    }

    /// Weights `w` with `(𝕴_level ∘ ⋯ ∘ 𝕴_0 f)(x) = Σ_p w_p f(ξ^0_p)`.
    pub fn weights(&self, level: usize, x: &[f64]) -> Vec<Complex64> {
        let g = &self.grids[level];
        let z = &self.anchors[level];
        let e = anchor_factor(self.kernel, self.side, z, x);
        let mut w: Vec<Complex64> = g
            .basis(x)
            .iter()
            .zip(g.points())
            .map(|(l, xi)| e * *l / anchor_factor(self.kernel, self.side, z, xi))
            .collect();
        for t in self.transfers[..level].iter().rev() {
            let mut next = vec![Complex64::new(0.0, 0.0); t.cols()];
            t.gemv_t_acc(&w, &mut next);
            w = next;
        }
        w
    }

    pub fn apply(&self, level: usize, values: &[Complex64], x: &[f64]) -> Complex64 {
        self.weights(level, x)
            .iter()
            .zip(values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GrowthRow {
    pub level: usize,
    /// Sampled `‖(I - 𝕴_ℓ∘⋯∘𝕴_1)(E_{y0} π)‖_{B_ℓ} / ‖π‖_{B_0}`, worst trial.
    pub error: f64,
    /// Sampled `‖𝕴_ℓ∘⋯∘𝕴_1(E_{y0} π)‖_{B_ℓ} / ‖π‖_{B_0}`, worst trial.
    pub norm_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthTable {
    pub degree: usize,
    pub trials: usize,
    pub shrinking: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// Largest `norm_ratio_ℓ / norm_ratio_{ℓ-1}`.
    pub fn max_norm_growth(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].norm_ratio / w[0].norm_ratio)
            .fold(0.0, f64::max)
    }
}

/// Nested boxes `B_0 ⊃ ⋯ ⊃ B_L` and anchors `y_0, y_{-1}, …, y_{-L}`.
#[derive(Clone, Debug)]
pub struct ReinterpolationSetup {
    pub boxes: Vec<AxisBox>,
    pub anchors: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub trials: usize,
    /// Sample points per direction on each `B_ℓ`.
    pub samples: usize,
    /// Sample points per direction for `‖π‖_{B_0}`.
    pub norm_samples: usize,
    pub seed: u64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            trials: 8,
            samples: DEFAULT_SAMPLES,
            norm_samples: 2 * DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

/// Applies the iterated re-interpolation to `E_{y0} π` for random `π ∈ Q_m`
/// and records sampled error and norm per level.
pub fn iterated_reinterpolation_experiment<K: Kernel + ?Sized>(
    kernel: &K,
    setup: &ReinterpolationSetup,
    degree: usize,
    opts: &ExperimentOptions,
) -> Result<GrowthTable> {
    let ExperimentOptions {
        trials,
        samples,
        norm_samples,
        seed,
    } = *opts;
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let shrinking = if setup.boxes.len() > 1 {
        shrinking_factor(&setup.boxes)?
    } else {
        0.0
    };
    let chain = ReinterpolationChain::new(kernel, Side::Row, &setup.boxes, &setup.anchors, degree)?;
    let y0 = &setup.anchors[0];
    let grid0 = chain.grids()[0].clone();
    let outer = sample_grid(&setup.boxes[0], norm_samples)?;
    let levels = chain.levels();
    #[allow(clippy::type_complexity)]
    let per_level: Vec<(Vec<Vec<f64>>, Vec<Vec<Complex64>>)> = (0..=levels)
        .into_par_iter()
        .map(|l| {
            let pts = sample_grid(&setup.boxes[l], samples)?;
            let w = pts.iter().map(|x| chain.weights(l, x)).collect();
            Ok((pts, w))
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<GrowthRow> = (0..=levels)
        .map(|level| GrowthRow {
            level,
            error: 0.0,
            norm_ratio: 0.0,
        })
        .collect();
    for _ in 0..trials {
        let coeffs: Vec<Complex64> = (0..grid0.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let pi = TensorInterpolant::from_values(grid0.clone(), coeffs.clone())?;
        let pi_norm = outer.iter().map(|x| pi.eval(x).norm()).fold(0.0, f64::max);
        let input: Vec<Complex64> = grid0
            .points()
            .zip(&coeffs)
            .map(|(xi, c)| anchor_factor(kernel, Side::Row, y0, xi) * c)
            .collect();
        for (row, (pts, ws)) in rows.iter_mut().zip(&per_level) {
            let (mut err, mut nrm) = (0.0f64, 0.0f64);
            for (x, w) in pts.iter().zip(ws) {
                let approx: Complex64 = w.iter().zip(&input).map(|(a, b)| a * b).sum();
                let exact = anchor_factor(kernel, Side::Row, y0, x) * pi.eval(x);
                err = err.max((approx - exact).norm());
                nrm = nrm.max(approx.norm());
            }
            row.error = row.error.max(err / pi_norm);
            row.norm_ratio = row.norm_ratio.max(nrm / pi_norm);
        }
    }
    Ok(GrowthTable {
        degree,
        trials,
        shrinking,
        rows,
    })
}

/// Smallest `ε` with `e_ℓ ≤ (1 + ε)^ℓ - 1` for all `ℓ ≥ 1`.
pub fn envelope_eps(errors: &[(usize, f64)]) -> Result<f64> {
    let mut eps = 0.0f64;
    let mut any = false;
    for &(l, e) in errors.iter().filter(|&&(l, _)| l >= 1) {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::IllConditioned(format!("error {e} at level {l}")));
        }
        eps = eps.max((e.ln_1p() / l as f64).exp_m1());
        any = true;
    }
    if !any {
        return Err(Error::IllConditioned("no level above zero".into()));
    }
    Ok(eps)
}

/// Least-squares fit of `e_ℓ ≈ (1 + ε)^ℓ - 1` in log space over `ℓ ≥ 1`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub eps: f64,
    /// Coefficient of determination of `ln e_ℓ` against the model.
    pub r_squared: f64,
    /// Largest `|ln(e_ℓ / model_ℓ)|`.
    pub max_log_deviation: f64,
}

pub fn fit_growth(errors: &[(usize, f64)]) -> Result<GrowthFit> {
    let data: Vec<(usize, f64)> = errors.iter().copied().filter(|&(l, _)| l >= 1).collect();
    if data.len() < 2 {
        return Err(Error::IllConditioned("need at least two levels".into()));
    }
    if let Some(&(l, e)) = data.iter().find(|&&(_, e)| !(e > 0.0 && e.is_finite())) {
        return Err(Error::IllConditioned(format!(
            "error {e} at level {l} is not positive"
        )));
    }
    let cost = |t: f64| -> f64 {
        let eps = t.exp();
        data.iter()
            .map(|&(l, e)| (e.ln() - growth_error(eps, l).ln()).powi(2))
            .sum()
    };
    let (mut a, mut b) = (-60.0f64, 5.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = (a + b) / 2.0;
    let eps = t.exp();
    let logs: Vec<f64> = data.iter().map(|&(_, e)| e.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let ss_tot: f64 = logs.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = cost(t);
    let max_log_deviation = data
        .iter()
        .map(|&(l, e)| (e.ln() - growth_error(eps, l).ln()).abs())
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        eps,
        r_squared: if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            1.0
        },
        max_log_deviation,
    })
}

/// One-dimensional model with phase `Φ(x, y) = sqrt((x - y)² + δ²)`.
///
/// The boxes are `B_ℓ = [0, 2^{-ℓ}]`. The anchors are the centres of growing
/// boxes `[c, c + w 2^ℓ]` with `w = 2γ/κ`, so that
/// `κ diam(B_ℓ) |y_{-ℓ-1} - y_{-ℓ}| = γ/2` on every level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalvingModel {
    pub kappa: f64,
    pub delta: f64,
    pub gamma: f64,
    pub offset: f64,
    pub levels: usize,
}

impl Default for HalvingModel {
    fn default() -> Self {
        Self {
            kappa: 256.0,
            delta: 1.0,
            gamma: 1.0,
            offset: 1.5,
            levels: 6,
        }
    }
}

impl HalvingModel {
    pub fn kernel(&self) -> Result<crate::kernel::FnKernel> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        let delta2 = self.delta * self.delta;
        Ok(crate::kernel::FnKernel::new(
            self.kappa,
            move |x: &[f64], y: &[f64]| ((x[0] - y[0]).powi(2) + delta2).sqrt(),
            |_: &[f64], _: &[f64]| Complex64::new(1.0, 0.0),
        ))
    }

    pub fn setup(&self) -> Result<ReinterpolationSetup> {
        if !(self.kappa > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(
                "kappa and gamma must be positive".into(),
            ));
        }
        let w = 2.0 * self.gamma / self.kappa;
        let boxes = (0..=self.levels)
            .map(|l| AxisBox::new(vec![0.0], vec![0.5f64.powi(l as i32)]))
            .collect::<Result<Vec<_>>>()?;
        let anchors = (0..=self.levels)
            .map(|l| vec![self.offset + w * 2f64.powi(l as i32) / 2.0])
            .collect();
        Ok(ReinterpolationSetup { boxes, anchors })
    }

    /// `max_ℓ κ diam(B_ℓ) |y_{-ℓ-1} - y_{-ℓ}|`
    pub fn measured_gamma(&self) -> Result<f64> {
        let s = self.setup()?;
        Ok(s.boxes
            .iter()
            .zip(s.anchors.windows(2))
            .map(|(b, a)| self.kappa * b.diam() * (a[1][0] - a[0][0]).abs())
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilitySweep {
    pub tables: Vec<GrowthTable>,
    /// Tightest envelope `ε_m` per table.
    pub envelope: Vec<f64>,
    /// Least-squares fits per table.
    pub fits: Vec<GrowthFit>,
}

impl StabilitySweep {
    /// `ε_{m_{k+1}} / ε_{m_k}` of the envelope parameters.
    pub fn eps_ratios(&self) -> Vec<f64> {
        self.envelope.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Whether `norm_ratio_ℓ ≤ (1 + ε_m)^ℓ (1 + slack)` on every level of
    /// every table.
    pub fn norms_bounded(&self, slack: f64) -> bool {
        self.tables.iter().zip(&self.envelope).all(|(t, &eps)| {
            t.rows
                .iter()
                .all(|r| r.norm_ratio <= (1.0 + growth_error(eps, r.level)) * (1.0 + slack))
        })
    }
}

pub fn stability_sweep(
    model: &HalvingModel,
    degrees: &[usize],
    opts: &ExperimentOptions,
) -> Result<StabilitySweep> {
    let kernel = model.kernel()?;
    let setup = model.setup()?;
    let tables = degrees
        .iter()
        .map(|&m| iterated_reinterpolation_experiment(&kernel, &setup, m, opts))
        .collect::<Result<Vec<_>>>()?;
    let data: Vec<Vec<(usize, f64)>> = tables
        .iter()
        .map(|t| t.rows.iter().map(|r| (r.level, r.error)).collect())
        .collect();
    let envelope = data
        .iter()
        .map(|d| envelope_eps(d))
        .collect::<Result<Vec<_>>>()?;
    let fits = data
        .iter()
        .map(|d| fit_growth(d))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilitySweep {
        tables,
        envelope,
        fits,
    })
}

/// Box sequences for both arguments. The expansion in `x` on `B^X_ℓ` is
/// anchored at the centre of `B^Y_{L-ℓ}` and vice versa.
#[derive(Clone, Debug)]
pub struct ButterflyGeometry {
    pub x_boxes: Vec<AxisBox>,
    pub y_boxes: Vec<AxisBox>,
}

impl ButterflyGeometry {
    pub fn new(x_boxes: Vec<AxisBox>, y_boxes: Vec<AxisBox>) -> Result<Self> {
        if x_boxes.is_empty() || x_boxes.len() != y_boxes.len() {
            return Err(Error::DimensionMismatch {
                expected: x_boxes.len().max(1),
                got: y_boxes.len(),
            });
        }
        Ok(Self { x_boxes, y_boxes })
    }

    /// Intervals `B^X_ℓ = [0, a 2^{-ℓ}]` and `B^Y_ℓ = [c, c + a 2^{-ℓ}]`.
    /// Every pair `(B^X_ℓ, B^Y_{L-ℓ})` has the same diameter product `a² 2^{-L}`.
    pub fn halving_1d(a: f64, c: f64, levels: usize) -> Result<Self> {
        let size = |l: usize| a * 0.5f64.powi(l as i32);
        let x = (0..=levels)
            .map(|l| AxisBox::new(vec![0.0], vec![size(l)]))
            .collect::<Result<Vec<_>>>()?;
        let y = (0..=levels)
            .map(|l| AxisBox::new(vec![c], vec![c + size(l)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(x, y)
    }

    /// [`Self::halving_1d`] with `a = p 2^{L/2}`, so that the diameter
    /// product of every level pair is `p²` independently of `L`.
    pub fn parabolic_1d(p: f64, c: f64, levels: usize) -> Result<Self> {
        Self::halving_1d(p * 2f64.powf(levels as f64 / 2.0), c, levels)
    }

    pub fn levels(&self) -> usize {
        self.x_boxes.len() - 1
    }

    /// Single-level pairs `(B^X_0, B^Y_L)` and `(B^X_L, B^Y_0)` on which the
    /// first expansion of each argument happens.
    pub fn outer_pairs(&self) -> [ButterflyGeometry; 2] {
        let l = self.levels();
        [
            ButterflyGeometry {
                x_boxes: vec![self.x_boxes[0].clone()],
                y_boxes: vec![self.y_boxes[l].clone()],
            },
            ButterflyGeometry {
                x_boxes: vec![self.x_boxes[l].clone()],
                y_boxes: vec![self.y_boxes[0].clone()],
            },
        ]
    }

    /// `y_0, y_{-1}, …, y_{-L}`
    pub fn y_anchors(&self) -> Vec<Vec<f64>> {
        self.y_boxes.iter().rev().map(AxisBox::center).collect()
    }

    /// `x_0, x_{-1}, …, x_{-L}`
    pub fn x_anchors(&self) -> Vec<Vec<f64>> {
        self.x_boxes.iter().rev().map(AxisBox::center).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupError {
    pub abs: f64,
    /// Sampled `sup |k|` on the same grid.
    pub reference: f64,
}

impl SupError {
    pub fn relative(&self) -> f64 {
        self.abs / self.reference
    }
}

/// Sampled `sup |k - k^BF|` on `B^X_L × B^Y_L`, where both arguments are
/// re-interpolated along their full chains.
pub fn kernel_butterfly_error<K: Kernel + ?Sized>(
    kernel: &K,
    geometry: &ButterflyGeometry,
    degree: usize,
    samples: usize,
) -> Result<SupError> {
    let l = geometry.levels();
    let xc = ReinterpolationChain::new(
        kernel,
        Side::Row,
        &geometry.x_boxes,
        &geometry.y_anchors(),
        degree,
    )?;
    let yc = ReinterpolationChain::new(
        kernel,
        Side::Col,
        &geometry.y_boxes,
        &geometry.x_anchors(),
        degree,
    )?;
    let xs: Vec<&[f64]> = xc.input_nodes().collect();
    let ys: Vec<&[f64]> = yc.input_nodes().collect();
    let mut k0 = CMatrix::zeros(xs.len(), ys.len());
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            k0.set(i, j, kernel.eval(x, y)?);
        }
    }
    let xp = sample_grid(&geometry.x_boxes[l], samples)?;
    let yp = sample_grid(&geometry.y_boxes[l], samples)?;
    let yw: Vec<Vec<Complex64>> = yp.iter().map(|y| yc.weights(l, y)).collect();
    xp.par_iter()
        .map(|x| {
            let wx = xc.weights(l, x);
            let mut row = vec![Complex64::new(0.0, 0.0); k0.cols()];
            k0.gemv_t_acc(&wx, &mut row);
            let mut out = (0.0f64, 0.0f64);
            for (y, wy) in yp.iter().zip(&yw) {
                let approx: Complex64 = row.iter().zip(wy).map(|(a, b)| a * b).sum();
                let exact = kernel.eval(x, y)?;
                out.0 = out.0.max((approx - exact).norm());
                out.1 = out.1.max(exact.norm());
            }
            Ok(out)
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
        .map(|(abs, reference)| SupError { abs, reference })
}

/// Ratio of the multilevel error to the larger single-level error on the
/// outer pairs.
pub fn stability_factor<K: Kernel + ?Sized>(
    kernel: &K,
    geometry: &ButterflyGeometry,
    degree: usize,
    samples: usize,
) -> Result<f64> {
    let multi = kernel_butterfly_error(kernel, geometry, degree, samples)?.abs;
    let single = geometry
        .outer_pairs()
        .iter()
        .map(|g| Ok(kernel_butterfly_error(kernel, g, degree, samples)?.abs))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(multi / single)
}

/// CSV row `(index, measured, envelope)` with index `ℓ` or `m`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnvelopeRow {
    pub index: usize,
    pub measured: f64,
    pub envelope: f64,
}

pub fn write_envelope_csv(path: &Path, rows: &[EnvelopeRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_envelope_csv(path: &Path) -> Result<Vec<EnvelopeRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Rows of a growth table against `(1 + ε)^ℓ - 1`.
pub fn envelope_rows(table: &GrowthTable, eps: f64) -> Vec<EnvelopeRow> {
    table
        .rows
        .iter()
        .map(|r| EnvelopeRow {
            index: r.level,
            measured: r.error,
            envelope: growth_error(eps, r.level),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{FnKernel, Reinterpolant};

    fn smooth(kappa: f64) -> FnKernel {
        FnKernel::new(
            kappa,
            |x: &[f64], y: &[f64]| ((x[0] - y[0]).powi(2) + 1.0).sqrt(),
            |_: &[f64], _: &[f64]| Complex64::new(1.0, 0.0),
        )
    }

    fn opts(trials: usize, samples: usize) -> ExperimentOptions {
        ExperimentOptions {
            trials,
            samples,
            norm_samples: samples,
            seed: 1,
        }
    }

    #[test]
    fn envelope_is_tight() {
        let data = [(1, 2e-3), (2, 2.5e-3), (3, 1e-3)];
        let eps = envelope_eps(&data).unwrap();
        assert!((eps - 2e-3).abs() < 1e-15);
        assert!(data
            .iter()
            .all(|&(l, e)| e <= growth_error(eps, l) * (1.0 + 1e-12)));
        assert!(envelope_eps(&[(0, 1.0)]).is_err());
    }

    #[test]
    fn chain_matches_nested_reinterpolants() {
        let k = smooth(20.0);
        let model = HalvingModel {
            kappa: 20.0,
            levels: 3,
            ..HalvingModel::default()
        };
        let s = model.setup().unwrap();
        let chain = ReinterpolationChain::new(&k, Side::Row, &s.boxes, &s.anchors, 5).unwrap();
        let f = |x: &[f64]| Complex64::new((3.0 * x[0]).sin(), x[0] * x[0]);
        let values: Vec<Complex64> = chain.input_nodes().map(f).collect();
        let r0 =
            Reinterpolant::new(&k, Side::Row, &s.anchors[0], &s.boxes[0], 5, |x| Ok(f(x))).unwrap();
        let r1 = Reinterpolant::new(&k, Side::Row, &s.anchors[1], &s.boxes[1], 5, |x| {
            Ok(r0.eval(x))
        })
        .unwrap();
        let r2 = Reinterpolant::new(&k, Side::Row, &s.anchors[2], &s.boxes[2], 5, |x| {
            Ok(r1.eval(x))
        })
        .unwrap();
        for x in sample_grid(&s.boxes[2], 7).unwrap() {
            let a = chain.apply(2, &values, &x);
            assert!((a - r2.eval(&x)).norm() < 1e-12 * r2.eval(&x).norm().max(1.0));
        }
    }

    #[test]
    fn empty_chain_and_zero_phase() {
        let model = HalvingModel {
            levels: 0,
            ..HalvingModel::default()
        };
        let k = model.kernel().unwrap();
        let t = iterated_reinterpolation_experiment(&k, &model.setup().unwrap(), 4, &opts(3, 16))
            .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].error < 1e-12);
        assert!(t.rows[0].norm_ratio <= 1.0 + 1e-12);

        let model = HalvingModel {
            levels: 4,
            ..HalvingModel::default()
        };
        let t = iterated_reinterpolation_experiment(
            &smooth(0.0),
            &model.setup().unwrap(),
            6,
            &opts(3, 16),
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.error < 1e-12));
    }

    #[test]
    fn shrinking_is_enforced() {
        let b = |a: f64, c: f64| AxisBox::new(vec![a], vec![c]).unwrap();
        assert!(shrinking_factor(&[b(0.0, 1.0), b(0.0, 1.0)]).is_err());
        assert!(shrinking_factor(&[b(0.0, 1.0), b(0.5, 1.5)]).is_err());
        assert!(
            (shrinking_factor(&[b(0.0, 1.0), b(0.0, 0.5), b(0.1, 0.3)]).unwrap() - 0.5).abs()
                < 1e-15
        );
        let setup = ReinterpolationSetup {
            boxes: vec![b(0.0, 1.0), b(0.0, 2.0)],
            anchors: vec![vec![3.0], vec![3.0]],
        };
        assert!(iterated_reinterpolation_experiment(&smooth(1.0), &setup, 2, &opts(1, 4)).is_err());
    }

    #[test]
    fn fit_recovers_epsilon() {
        let data: Vec<(usize, f64)> = (1..=6).map(|l| (l, growth_error(3e-5, l))).collect();
        let fit = fit_growth(&data).unwrap();
        assert!((fit.eps / 3e-5 - 1.0).abs() < 1e-6);
        assert!(fit.r_squared > 0.999_999);
        assert!(fit_growth(&[(1, 1e-3)]).is_err());
        assert!(fit_growth(&[(1, 1e-3), (2, 0.0)]).is_err());
    }

    #[test]
    fn polynomial_amplitude_is_exact() {
        let k = FnKernel::new(
            0.0,
            |_: &[f64], _: &[f64]| 0.0,
            |x: &[f64], y: &[f64]| Complex64::new(x[0] * x[0] * y[0] - 2.0 * y[0], x[0]),
        );
        let g = ButterflyGeometry::halving_1d(0.25, 2.0, 2).unwrap();
        let e = kernel_butterfly_error(&k, &g, 3, 16).unwrap();
        assert!(e.abs < 1e-12 * e.reference);
    }

    fn helmholtz_like(kappa: f64) -> FnKernel {
        FnKernel::new(
            kappa,
            |x: &[f64], y: &[f64]| ((x[0] - y[0]).powi(2) + 1.0).sqrt(),
            |x: &[f64], y: &[f64]| Complex64::new(1.0 / ((x[0] - y[0]).powi(2) + 1.0).sqrt(), 0.0),
        )
    }

    #[test]
    fn error_decays_in_degree() {
        let k = helmholtz_like(64.0);
        let g = ButterflyGeometry::parabolic_1d(0.125, 1.0, 2).unwrap();
        let errs: Vec<f64> = (0..=8)
            .map(|m| kernel_butterfly_error(&k, &g, m, 32).unwrap().relative())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < 2.0 * w[0]));
        let (xs, ys): (Vec<f64>, Vec<f64>) = errs
            .iter()
            .enumerate()
            .map(|(m, e)| (m as f64, e.ln()))
            .unzip();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope < -1.0, "slope {slope}");
    }

    #[test]
    fn multilevel_error_is_a_bounded_multiple() {
        let k = helmholtz_like(64.0);
        let g = ButterflyGeometry::parabolic_1d(0.125, 1.0, 2).unwrap();
        for m in 6..=8 {
            let f = stability_factor(&k, &g, m, 32).unwrap();
            assert!(f < 10.0, "m = {m}: factor {f}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("env.csv");
        let rows = vec![
            EnvelopeRow {
                index: 1,
                measured: 1.25e-7,
                envelope: 3.0e-7,
            },
            EnvelopeRow {
                index: 2,
                measured: 2.5e-7,
                envelope: 6.000000000000001e-7,
            },
        ];
        write_envelope_csv(&path, &rows).unwrap();
        assert_eq!(read_envelope_csv(&path).unwrap(), rows);
    }
}
