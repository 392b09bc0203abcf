use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Interval;

/// Boundary points sampled by [`verify_inclusion`].
pub const INCLUSION_SAMPLES: usize = 2048;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// Bernstein elliptic disc `E_ρ` pushed forward to an interval.
#[derive(Clone, Debug)]
pub struct EllipseParams {
    pub interval: Interval,
    pub rho: f64,
}

impl EllipseParams {
    pub fn new(interval: Interval, rho: f64) -> Result<Self> {
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipse parameter {rho} must exceed 1"
            )));
        }
        Ok(Self { interval, rho })
    }

    pub fn reference(rho: f64) -> Result<Self> {
        Self::new(Interval::new(-1.0, 1.0)?, rho)
    }

    /// Pull-back of `z` to the reference interval `[-1, 1]`.
    pub fn pullback(&self, z: Complex64) -> Complex64 {
        (z - self.interval.center()) / self.interval.half_width()
    }

    /// Closed membership `|w - 1| + |w + 1| ≤ ρ + 1/ρ`.
    pub fn contains(&self, z: Complex64) -> bool {
        in_reference_disc(self.pullback(z), self.rho, 0.0)
    }

    /// Boundary point at parameter `θ`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        let w = joukowski(self.rho, theta);
        self.interval.center() + self.interval.half_width() * w
    }
}

fn joukowski(rho: f64, theta: f64) -> Complex64 {
    let e = Complex64::cis(theta);
    (rho * e + e.inv() / rho) / 2.0
}

fn in_reference_disc(w: Complex64, rho: f64, rel_tol: f64) -> bool {
    let lhs = (w - 1.0).norm() + (w + 1.0).norm();
    lhs <= (rho + 1.0 / rho) * (1.0 + rel_tol)
}

/// Smallest `ρ₁` with `E_{ρ₀}` over a subinterval of relative length `h`
/// contained in `E_{ρ₁}`.
pub fn solve_rho1(rho0: f64, h: f64) -> Result<f64> {
    if !(rho0 > 1.0 && rho0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rho0 = {rho0} must exceed 1"
        )));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "h = {h} must lie in (0, 1]"
        )));
    }
    let rx = (rho0 + 1.0 / rho0) / 2.0;
    let s = 2.0 + 2.0 * h * (rx - 1.0);
    let disc = ((s - 2.0) * (s + 2.0)).sqrt();
    Ok(((s + disc) / 2.0).min(rho0))
}

/// Samples the boundary of `E_{ρ₀}` over `sub` and checks that every point
/// lies in the closed reference disc `E_{ρ₁}`.
pub fn verify_inclusion(rho0: f64, sub: &Interval, rho1: f64) -> bool {
    let (c, hw) = (sub.center(), sub.half_width());
    (0..INCLUSION_SAMPLES).all(|k| {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / INCLUSION_SAMPLES as f64;
        in_reference_disc(c + hw * joukowski(rho0, theta), rho1, MEMBERSHIP_TOL)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionStats {
    pub samples: usize,
    pub shrink: f64,
    /// Samples for which the solved `ρ₁` passes.
    pub included: usize,
    /// Samples for which `(1 - shrink) ρ₁` fails.
    pub broken_by_shrink: usize,
    /// Largest `ρ₁/ρ₀` encountered.
    pub max_ratio: f64,
}

/// Random `(ρ₀, h)` with `ρ₀ ∈ [1.05, 100]`, `h ∈ [0.05, 0.95]`; the
/// subinterval touches one end of `[-1, 1]`, chosen at random.
pub fn inclusion_statistics(samples: usize, shrink: f64, seed: u64) -> Result<InclusionStats> {
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = InclusionStats {
        samples,
        shrink,
        included: 0,
        broken_by_shrink: 0,
        max_ratio: 0.0,
    };
    for _ in 0..samples {
        let rho0 = rng.gen_range(1.05..=100.0);
        let h = rng.gen_range(0.05..=0.95);
        let sub = if rng.gen_bool(0.5) {
            Interval::new(-1.0, -1.0 + 2.0 * h)?
        } else {
            Interval::new(1.0 - 2.0 * h, 1.0)?
        };
        let rho1 = solve_rho1(rho0, h)?;
        stats.max_ratio = stats.max_ratio.max(rho1 / rho0);
        if verify_inclusion(rho0, &sub, rho1) {
            stats.included += 1;
        }
        if !verify_inclusion(rho0, &sub, rho1 * (1.0 - shrink)) {
            stats.broken_by_shrink += 1;
        }
    }
    Ok(stats)
}

/// `sup ρ₁(ρ₀, h)/ρ₀` over a logarithmic grid of `ρ₀` in `[lo, hi]`.
pub fn q_hat_scan(h: f64, lo: f64, hi: f64, points: usize) -> Result<f64> {
    if points < 2 || !(lo > 1.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "bad scan range [{lo}, {hi}] with {points} points"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).try_fold(0.0f64, |acc, k| {
        let rho0 = (a + (b - a) * k as f64 / (points - 1) as f64).exp();
        Ok(acc.max(solve_rho1(rho0, h)? / rho0))
    })
}
