//! Elliptic-disc geometry, stability constants and numerical harnesses for
//! iterated re-interpolation.

mod ellipse;
mod harness;
mod stability;

pub use ellipse::{
    inclusion_statistics, q_hat_scan, solve_rho1, verify_inclusion, EllipseParams, InclusionStats,
    INCLUSION_SAMPLES,
};
pub use harness::{
    envelope_eps, envelope_rows, fit_growth, iterated_reinterpolation_experiment,
    kernel_butterfly_error, read_envelope_csv, sample_grid, shrinking_factor, stability_factor,
    stability_sweep, write_envelope_csv, ButterflyGeometry, EnvelopeRow, ExperimentOptions,
    GrowthFit, GrowthRow, GrowthTable, HalvingModel, ReinterpolationChain, ReinterpolationSetup,
    StabilitySweep, SupError, DEFAULT_SAMPLES,
};
pub use stability::{error_envelope, growth_error, stability_constant_c1, StabilityBudget};
