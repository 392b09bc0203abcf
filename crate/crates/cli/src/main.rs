use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use butterfly::analysis::{
    envelope_rows, stability_sweep, write_envelope_csv, ExperimentOptions, HalvingModel,
};
use butterfly::bench::{bench, verify, BenchConfig, ErrorReport, ReportKind, SUITES};
use butterfly::clustering::{
    build_block_partition, build_cluster_tree, check_assumption_eta2, partition_stats,
};
use butterfly::galerkin::{sphere_mesh, write_dense, Assembler, Discretization, QuadratureConfig};
use butterfly::kernel::Helmholtz;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "butterfly",
    version,
    about = "Butterfly compression of the Helmholtz single-layer operator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Spectral,
    Frobenius,
    Both,
}

impl From<Report> for ReportKind {
    fn from(r: Report) -> Self {
        match r {
            Report::Spectral => ReportKind::Spectral,
            Report::Frobenius => ReportKind::Frobenius,
            Report::Both => ReportKind::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Factorise for several degrees and report errors against the dense matrix.
    Bench {
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 4.0)]
        kappa: f64,
        /// Interpolation degree; repeat for a sweep (default 0 to 4).
        #[arg(long = "degree")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        eta1: f64,
        #[arg(long, default_value_t = 32)]
        leaf_size: usize,
        #[arg(long, value_enum, default_value_t = Report::Both)]
        report: Report,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        quad_order: usize,
        #[arg(long, default_value_t = 4)]
        singular_order: usize,
        #[arg(long, default_value_t = 1024)]
        budget_mb: u64,
    },
    /// Run an invariant suite and print a JSON summary.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
    },
    /// Write the sphere mesh as Wavefront OBJ.
    Mesh {
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble the dense Galerkin matrix and dump it as raw complex128.
    Dense {
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 4.0)]
        kappa: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        quad_order: usize,
        #[arg(long, default_value_t = 4)]
        singular_order: usize,
        #[arg(long, default_value_t = 1024)]
        budget_mb: u64,
    },
    /// Print cluster tree and block partition statistics as JSON.
    Partition {
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 4.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        eta1: f64,
        #[arg(long, default_value_t = 32)]
        leaf_size: usize,
    },
    /// Iterated re-interpolation growth table for the one-dimensional model.
    Stability {
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = 256.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn quadrature(regular_order: usize, singular_order: usize) -> QuadratureConfig {
    QuadratureConfig {
        regular_order,
        singular_order,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

fn print_report(r: &ErrorReport) {
    println!(
        "n = {}, kappa = {}, depth = {}, plans = {}, dense assembly {:.1} s",
        r.n, r.config.kappa, r.tree.depth, r.partition.plans, r.assembly_seconds
    );
    println!(
        "{:>3} {:>11} {:>7} {:>11} {:>7} {:>9} {:>8}",
        "m", "spectral", "factor", "frobenius", "factor", "storage", "build s"
    );
    for row in &r.rows {
        println!(
            "{:>3} {:>11} {:>7} {:>11} {:>7} {:>9.3} {:>8.1}",
            row.m,
            fmt_opt(row.spectral),
            row.spectral_factor
                .map_or("-".into(), |f| format!("{f:.2}")),
            fmt_opt(row.frobenius),
            row.frobenius_factor
                .map_or("-".into(), |f| format!("{f:.2}")),
            row.storage_ratio,
            row.build_seconds
        );
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Bench {
            level,
            kappa,
            degrees,
            eta1,
            leaf_size,
            report,
            out,
            format,
            seed,
            quad_order,
            singular_order,
            budget_mb,
        } => {
            let config = BenchConfig {
                mesh_level: level,
                kappa,
                degrees: if degrees.is_empty() {
                    (0..=4).collect()
                } else {
                    degrees
                },
                eta1,
                leaf_size,
                quadrature: quadrature(quad_order, singular_order),
                report: report.into(),
                budget_mb,
                seed,
                ..BenchConfig::default()
            };
            let r = bench(&config)?;
            print_report(&r);
            if let Some(path) = out {
                match format {
                    Format::Csv => r.write_csv(&path)?,
                    Format::Json => r.write_json(&path)?,
                }
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Verify { suite } => {
            let r = verify(&suite)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(r.passed)
        }
        Command::Mesh { level, out } => {
            let mesh = sphere_mesh(level)?;
            let mut w = BufWriter::new(
                File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            mesh.write_obj(&mut w)?;
            w.flush()?;
            println!("wrote {} triangles to {}", mesh.len(), out.display());
            Ok(true)
        }
        Command::Dense {
            level,
            kappa,
            out,
            quad_order,
            singular_order,
            budget_mb,
        } => {
            let disc =
                Discretization::new(sphere_mesh(level)?, quadrature(quad_order, singular_order))?;
            let k = disc.assemble_dense(&Helmholtz::new(kappa)?, budget_mb)?;
            let meta = write_dense(&out, &k, kappa, level)?;
            println!("{}", serde_json::to_string_pretty(&meta)?);
            Ok(true)
        }
        Command::Partition {
            level,
            kappa,
            eta1,
            leaf_size,
        } => {
            let disc = Discretization::new(sphere_mesh(level)?, QuadratureConfig::default())?;
            let rows = build_cluster_tree(&disc.row_supports(), leaf_size)?;
            let cols = build_cluster_tree(&disc.col_supports(), leaf_size)?;
            let p = build_block_partition(&rows, &cols, eta1)?;
            let eta2 = check_assumption_eta2(&rows, &cols, &p, kappa, f64::INFINITY)?;
            let out = serde_json::json!({
                "tree": rows.stats(),
                "partition": partition_stats(&rows, &cols, &p),
                "eta2": eta2,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Stability {
            degree,
            levels,
            kappa,
            gamma,
            trials,
            seed,
            out,
        } => {
            if levels == 0 {
                bail!("at least one level is required");
            }
            let model = HalvingModel {
                kappa,
                gamma,
                levels,
                ..HalvingModel::default()
            };
            let opts = ExperimentOptions {
                trials,
                seed,
                ..ExperimentOptions::default()
            };
            let sweep = stability_sweep(&model, &[degree], &opts)?;
            let rows = envelope_rows(&sweep.tables[0], sweep.envelope[0]);
            println!("level,measured,envelope,norm_ratio");
            for (r, g) in rows.iter().zip(&sweep.tables[0].rows) {
                println!(
                    "{},{:.6e},{:.6e},{:.6}",
                    r.index, r.measured, r.envelope, g.norm_ratio
                );
            }
            if let Some(path) = out {
                write_envelope_csv(&path, &rows)?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
