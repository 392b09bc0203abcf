use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::lebesgue_constant;

/// Inputs of the iterated re-interpolation stability constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityBudget {
    /// Bound on `κ diam(B_ℓ) |y_{-ℓ-1} - y_{-ℓ}|` scaled by the phase.
    pub gamma: f64,
    pub rho: f64,
    pub m: usize,
    pub d: usize,
    pub levels: usize,
    pub lambda_m: f64,
}

impl StabilityBudget {
    pub fn new(
        gamma: f64,
        rho: f64,
        m: usize,
        d: usize,
        levels: usize,
        lambda_m: f64,
    ) -> Result<Self> {
        let b = Self {
            gamma,
            rho,
            m,
            d,
            levels,
            lambda_m,
        };
        b.validate()?;
        Ok(b)
    }

    /// Budget with the Chebyshev Lebesgue constant of degree `m`.
    pub fn chebyshev(gamma: f64, rho: f64, m: usize, d: usize, levels: usize) -> Result<Self> {
        Self::new(gamma, rho, m, d, levels, lebesgue_constant(m))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} must be positive",
                self.gamma
            )));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho = {} must exceed 1",
                self.rho
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(self.lambda_m >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Lebesgue constant {} below 1",
                self.lambda_m
            )));
        }
        Ok(())
    }
}

/// `C₁ = 2d/(ρ-1) (1 + Λ_m)^d exp(γ((ρ + 1/ρ)/2 + 1))`
pub fn stability_constant_c1(budget: &StabilityBudget) -> f64 {
    let b = budget;
    let d = b.d as f64;
    2.0 * d / (b.rho - 1.0)
        * (1.0 + b.lambda_m).powi(b.d as i32)
        * (b.gamma * ((b.rho + 1.0 / b.rho) / 2.0 + 1.0)).exp()
}

/// `(1 + C₁ q̂^m)^ℓ - 1` for `ℓ = 0..=L`.
pub fn error_envelope(budget: &StabilityBudget, q_hat: f64) -> Vec<f64> {
    let eps = stability_constant_c1(budget) * q_hat.powi(budget.m as i32);
    (0..=budget.levels).map(|l| growth_error(eps, l)).collect()
}

/// `(1 + ε)^ℓ - 1`, accurate for small `ε`.
pub fn growth_error(eps: f64, levels: usize) -> f64 {
    (levels as f64 * eps.ln_1p()).exp_m1()
}
