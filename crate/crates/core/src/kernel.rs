//! Oscillatory kernels `k(x, y) = exp(iκΦ(x, y)) A(x, y)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::{AxisBox, TensorInterpolant};

const SINGULAR_TOL: f64 = 1e-14;

pub trait Kernel: Send + Sync {
    fn wavenumber(&self) -> f64;

    fn phase(&self, x: &[f64], y: &[f64]) -> f64;

    fn amplitude(&self, x: &[f64], y: &[f64]) -> Complex64;

    /// Whether `A` blows up on the diagonal `x = y`.
    fn is_singular(&self) -> bool {
        false
    }

    /// Whether `k(x, y) = k(y, x)`.
    fn is_symmetric(&self) -> bool {
        false
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        if self.is_singular() && coincident(x, y) {
            return Err(Error::SingularEvaluation);
        }
        Ok(self.phase_factor(x, y) * self.amplitude(x, y))
    }

    /// `exp(iκΦ(x, y))`
    fn phase_factor(&self, x: &[f64], y: &[f64]) -> Complex64 {
        Complex64::cis(self.wavenumber() * self.phase(x, y))
    }

    /// `k(x, y) exp(-iκ(Φ(x, y0) + Φ(x0, y)))`
    fn modified(&self, x0: &[f64], y0: &[f64], x: &[f64], y: &[f64]) -> Result<Complex64> {
        let shift = self.phase(x, y0) + self.phase(x0, y);
        Ok(self.eval(x, y)? * Complex64::cis(-self.wavenumber() * shift))
    }

    /// `Φ(x, y) - Φ(x, y0) - Φ(x0, y) + Φ(x0, y0)`
    fn phase_residual(&self, x0: &[f64], y0: &[f64], x: &[f64], y: &[f64]) -> f64 {
        self.phase(x, y) - self.phase(x, y0) - self.phase(x0, y) + self.phase(x0, y0)
    }
}

fn coincident(x: &[f64], y: &[f64]) -> bool {
    let scale = norm(x).max(norm(y)).max(1.0);
    dist(x, y) <= SINGULAR_TOL * scale
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Helmholtz kernel `exp(iκ|x-y|) / (4π|x-y|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Helmholtz {
    kappa: f64,
}

impl Helmholtz {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("wavenumber {kappa}")));
        }
        Ok(Self { kappa })
    }
}

impl Kernel for Helmholtz {
    fn wavenumber(&self) -> f64 {
        self.kappa
    }

    fn phase(&self, x: &[f64], y: &[f64]) -> f64 {
        dist(x, y)
    }

    fn amplitude(&self, x: &[f64], y: &[f64]) -> Complex64 {
        Complex64::new(1.0 / (4.0 * PI * dist(x, y)), 0.0)
    }

    fn is_singular(&self) -> bool {
        true
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

type PhaseFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type AmplitudeFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// Kernel assembled from closures.
#[derive(Clone)]
pub struct FnKernel {
    kappa: f64,
    phase: Arc<PhaseFn>,
    amplitude: Arc<AmplitudeFn>,
    singular: bool,
    symmetric: bool,
}

impl FnKernel {
    pub fn new(
        kappa: f64,
        phase: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        amplitude: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kappa,
            phase: Arc::new(phase),
            amplitude: Arc::new(amplitude),
            singular: false,
            symmetric: false,
        }
    }

    pub fn singular(mut self, singular: bool) -> Self {
        self.singular = singular;
        self
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }
}

impl std::fmt::Debug for FnKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnKernel")
            .field("kappa", &self.kappa)
            .field("singular", &self.singular)
            .finish_non_exhaustive()
    }
}

impl Kernel for FnKernel {
    fn wavenumber(&self) -> f64 {
        self.kappa
    }

    fn phase(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.phase)(x, y)
    }

    fn amplitude(&self, x: &[f64], y: &[f64]) -> Complex64 {
        (self.amplitude)(x, y)
    }

    fn is_singular(&self) -> bool {
        self.singular
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Which argument of the phase the re-interpolated variable occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `E_z(x) = exp(iκΦ(x, z))`
    Row,
    /// `E_z(y) = exp(iκΦ(z, y))`
    Col,
}

/// Anchor phase factor `E_z` evaluated at `p`.
pub fn anchor_factor<K: Kernel + ?Sized>(
    kernel: &K,
    side: Side,
    anchor: &[f64],
    p: &[f64],
) -> Complex64 {
    match side {
        Side::Row => kernel.phase_factor(p, anchor),
        Side::Col => kernel.phase_factor(anchor, p),
    }
}

/// `E_z · I_m[f / E_z]` on a box.
#[derive(Clone, Debug)]
pub struct Reinterpolant<K> {
    kernel: K,
    side: Side,
    anchor: Vec<f64>,
    inner: TensorInterpolant,
}

impl<K: Kernel + Clone> Reinterpolant<K> {
    pub fn new<F>(
        kernel: &K,
        side: Side,
        anchor: &[f64],
        bbox: &AxisBox,
        degree: usize,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Complex64>,
    {
        let inner = TensorInterpolant::try_new(bbox, degree, |p| {
            Ok::<_, Error>(f(p)? / anchor_factor(kernel, side, anchor, p))
        })?;
        Ok(Self {
            kernel: kernel.clone(),
            side,
            anchor: anchor.to_vec(),
            inner,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn inner(&self) -> &TensorInterpolant {
        &self.inner
    }

    pub fn eval(&self, p: &[f64]) -> Complex64 {
        anchor_factor(&self.kernel, self.side, &self.anchor, p) * self.inner.eval(p)
    }
}

/// Principal branch of `sqrt(Σ z_i²)`, the holomorphic extension of the
/// Euclidean norm.
pub fn norm_extension(z: &[Complex64]) -> Complex64 {
    z.iter().map(|v| v * v).sum::<Complex64>().sqrt()
}

/// Evaluates the norm extension at a real point and checks that it agrees
/// with the Euclidean norm.
pub fn real_norm_extension_check(x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidParameter(
            "norm extension check needs a nonzero vector".into(),
        ));
    }
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let ext = norm_extension(&z);
    let exact = norm(x);
    let tol = 4.0 * f64::EPSILON * exact.max(f64::MIN_POSITIVE);
    if ext.im != 0.0 || (ext.re - exact).abs() > tol {
        return Err(Error::ExtensionMismatch(format!(
            "extension {ext} differs from norm {exact}"
        )));
    }
    Ok(ext.re)
}
