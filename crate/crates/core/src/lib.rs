//! Interpolation-based butterfly compression for oscillatory boundary
//! integral operators.
//!
//! The crate is organised bottom-up:
//!
//! * [`interp`] tensor Chebyshev interpolation on axis-parallel boxes,
//! * [`kernel`] oscillatory kernels `exp(iκΦ)·A` and phase-aware re-interpolation,
//! * [`clustering`] octree cluster trees, block partitions and butterfly plans,
//! * [`galerkin`] sphere meshes, quadrature and Galerkin assembly,
//! * [`butterfly`] factorisation, matrix-vector products and storage accounting,
//! * [`analysis`] the Bernstein-ellipse and stability bounds used to predict errors,
//! * [`bench`] the error-measurement harness behind the command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod butterfly;
pub mod clustering;
pub mod error;
pub mod galerkin;
pub mod interp;
pub mod kernel;
pub mod linalg;

pub use error::{Error, Result};
pub use num_complex::Complex64;
