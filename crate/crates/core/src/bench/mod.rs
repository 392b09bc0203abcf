//! Error and storage benchmarks of the factorisation of the Helmholtz
//! single-layer operator on sphere meshes, plus named invariant suites.

mod errors;
mod verify;

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use errors::{
    frobenius_error, power_norm, spectral_error, Difference, PowerIteration, SpectralEstimate,
};
pub use verify::{verify, CheckResult, SuiteReport, SUITES};

use crate::butterfly::{ButterflyFactorization, StorageReport};
use crate::clustering::{
    build_block_partition, build_cluster_tree, partition_stats, PartitionStats, TreeStats,
};
use crate::error::{Error, Result};
use crate::galerkin::{
    check_budget, sphere_mesh, Assembler, Discretization, Precomputed, QuadratureConfig,
};
use crate::kernel::Helmholtz;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Spectral,
    Frobenius,
    Both,
}

impl ReportKind {
    pub fn spectral(self) -> bool {
        matches!(self, Self::Spectral | Self::Both)
    }

    pub fn frobenius(self) -> bool {
        matches!(self, Self::Frobenius | Self::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub mesh_level: usize,
    pub kappa: f64,
    pub degrees: Vec<usize>,
    pub eta1: f64,
    pub leaf_size: usize,
    pub quadrature: QuadratureConfig,
    pub report: ReportKind,
    /// Memory allowed for the dense reference matrix.
    pub budget_mb: u64,
    pub seed: u64,
    pub power: PowerIteration,
    /// Repeat the spectral estimate from a second random start.
    pub restart_check: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            mesh_level: 4,
            kappa: 4.0,
            degrees: (0..=4).collect(),
            eta1: 1.0,
            leaf_size: 32,
            quadrature: QuadratureConfig::default(),
            report: ReportKind::Both,
            budget_mb: 1024,
            seed: 0,
            power: PowerIteration::default(),
            restart_check: true,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} must be non-negative",
                self.kappa
            )));
        }
        if self.degrees.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one degree is required".into(),
            ));
        }
        if !(self.eta1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta1 = {} must be positive",
                self.eta1
            )));
        }
        if self.leaf_size == 0 {
            return Err(Error::InvalidParameter("leaf size must be positive".into()));
        }
        self.quadrature.validate()
    }

    /// Number of triangles of the sphere mesh, `8 · 4^level`.
    pub fn n(&self) -> usize {
        8 << (2 * self.mesh_level)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub m: usize,
    pub spectral: Option<f64>,
    pub spectral_iterations: Option<usize>,
    pub spectral_converged: Option<bool>,
    /// Estimate from the second random start.
    pub spectral_restart: Option<f64>,
    /// Previous spectral error over this one.
    pub spectral_factor: Option<f64>,
    pub frobenius: Option<f64>,
    pub frobenius_factor: Option<f64>,
    pub coupling_entries: usize,
    pub transfer_entries: usize,
    pub leaf_entries: usize,
    pub dense_entries: usize,
    pub total_entries: usize,
    pub storage_ratio: f64,
    pub build_seconds: f64,
    pub error_seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: BenchConfig,
    pub n: usize,
    pub dense_frobenius_norm: f64,
    pub assembly_seconds: f64,
    pub tree: TreeSummary,
    pub partition: PartitionSummary,
    pub storage: Vec<StorageReport>,
    pub rows: Vec<ErrorRow>,
}

/// Serializable copies of the clustering statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub depth: usize,
    pub clusters_per_level: Vec<usize>,
    pub min_leaf_size: usize,
    pub max_leaf_size: usize,
}

impl From<TreeStats> for TreeSummary {
    fn from(s: TreeStats) -> Self {
        Self {
            depth: s.depth,
            clusters_per_level: s.clusters_per_level,
            min_leaf_size: s.min_leaf_size,
            max_leaf_size: s.max_leaf_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub plans: usize,
    pub parabolic_leaves: usize,
    pub inadmissible_leaves: usize,
    pub plans_by_half_levels: Vec<usize>,
    pub covered_entries: usize,
}

impl From<PartitionStats> for PartitionSummary {
    fn from(s: PartitionStats) -> Self {
        Self {
            plans: s.plans,
            parabolic_leaves: s.parabolic_leaves,
            inadmissible_leaves: s.inadmissible_leaves,
            plans_by_half_levels: s.plans_by_half_levels,
            covered_entries: s.covered_entries,
        }
    }
}

impl ErrorReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_rows_csv(path, &self.rows)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

pub fn write_rows_csv(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<ErrorRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// `previous / current`, when both exist and the current value is positive.
fn factor(previous: Option<f64>, current: Option<f64>) -> Option<f64> {
    match (previous, current) {
        (Some(p), Some(c)) if c > 0.0 => Some(p / c),
        _ => None,
    }
}

/// Assembles the dense reference once, then factorises and measures the
/// error for every requested degree. The dense blocks of the factorisation
/// are copied from the reference.
pub fn bench(config: &BenchConfig) -> Result<ErrorReport> {
    config.validate()?;
    let n = config.n();
    check_budget(n, config.budget_mb)?;
    let kernel = Helmholtz::new(config.kappa)?;
    let disc = Discretization::new(sphere_mesh(config.mesh_level)?, config.quadrature)?;

    let t = Instant::now();
    let dense = disc.assemble_dense(&kernel, config.budget_mb)?;
    let assembly_seconds = t.elapsed().as_secs_f64();
    let source = Precomputed::new(&disc, &dense)?;

    let rows_tree = build_cluster_tree(&source.row_supports(), config.leaf_size)?;
    let cols_tree = build_cluster_tree(&source.col_supports(), config.leaf_size)?;
    let partition = build_block_partition(&rows_tree, &cols_tree, config.eta1)?;
    let tree = TreeSummary::from(rows_tree.stats());
    let pstats = PartitionSummary::from(partition_stats(&rows_tree, &cols_tree, &partition));

    let mut rows: Vec<ErrorRow> = Vec::with_capacity(config.degrees.len());
    let mut storage = Vec::with_capacity(config.degrees.len());
    for &m in &config.degrees {
        let t = Instant::now();
        let fact = ButterflyFactorization::new(
            &kernel,
            &source,
            rows_tree.clone(),
            cols_tree.clone(),
            partition.clone(),
            m,
        )?;
        let build_seconds = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (spec, restart) = if config.report.spectral() {
            let a = spectral_error(&dense, &fact, &config.power, config.seed)?;
            let b = if config.restart_check {
                Some(
                    spectral_error(&dense, &fact, &config.power, config.seed.wrapping_add(1))?
                        .value,
                )
            } else {
                None
            };
            (Some(a), b)
        } else {
            (None, None)
        };
        let frob = if config.report.frobenius() {
            Some(frobenius_error(&dense, &fact)?)
        } else {
            None
        };
        let error_seconds = t.elapsed().as_secs_f64();

        let st = fact.storage_report()?;
        let prev = rows.last();
        rows.push(ErrorRow {
            m,
            spectral: spec.map(|s| s.value),
            spectral_iterations: spec.map(|s| s.iterations),
            spectral_converged: spec.map(|s| s.converged),
            spectral_restart: restart,
            spectral_factor: factor(prev.and_then(|r| r.spectral), spec.map(|s| s.value)),
            frobenius: frob,
            frobenius_factor: factor(prev.and_then(|r| r.frobenius), frob),
            coupling_entries: st.coupling_entries,
            transfer_entries: st.transfer_entries,
            leaf_entries: st.leaf_entries,
            dense_entries: st.dense_entries,
            total_entries: st.total_entries,
            storage_ratio: st.ratio,
            build_seconds,
            error_seconds,
        });
        storage.push(st);
    }
    Ok(ErrorReport {
        config: config.clone(),
        n,
        dense_frobenius_norm: dense.frobenius_norm(),
        assembly_seconds,
        tree,
        partition: pstats,
        storage,
        rows,
    })
}

/// Least-squares slope and `R²` of `ln e` against `m`.
pub fn log_linear_fit(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::IllConditioned("need at least two points".into()));
    }
    if let Some(&(m, e)) = points.iter().find(|&&(_, e)| !(e > 0.0)) {
        return Err(Error::IllConditioned(format!(
            "error {e} at m = {m} is not positive"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(m, _)| m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::IllConditioned("all degrees are equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok((slope, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(BenchConfig::default().validate().is_ok());
        assert_eq!(BenchConfig::default().n(), 2048);
        let bad = BenchConfig {
            degrees: vec![],
            ..BenchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = BenchConfig {
            kappa: -1.0,
            ..BenchConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn budget_refusal_before_assembly() {
        let c = BenchConfig {
            mesh_level: 6,
            budget_mb: 64,
            ..BenchConfig::default()
        };
        assert!(matches!(bench(&c), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn log_fit() {
        let pts: Vec<(usize, f64)> = (0..5).map(|m| (m, 3.0 * 10f64.powi(-(m as i32)))).collect();
        let (slope, r2) = log_linear_fit(&pts).unwrap();
        assert!((slope + 10f64.ln()).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert!(log_linear_fit(&pts[..1]).is_err());
    }

    #[test]
    fn factors() {
        assert_eq!(factor(Some(1.0), Some(0.25)), Some(4.0));
        assert_eq!(factor(None, Some(0.25)), None);
        assert_eq!(factor(Some(1.0), Some(0.0)), None);
    }
}
