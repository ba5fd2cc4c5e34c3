//! The `cgolab` command line: argument parsing, dispatch and exit codes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::alessandrini::{fourier_probe, BoundaryData, ProbeMode, ProbeSetup};
use crate::cgo::Vec3;
use crate::error::{LabError, Result};
use crate::forward::{add_noise_with, NoiseSpec};
use crate::grid::fourier_transform_at;
use crate::io::{write_reconstruction, write_samples};
use crate::lab::checks::{log_log_slope, observed_orders, plane_wave_convergence, run_cgo_check, CgoCheckConfig};
use crate::lab::report::{read_records_csv, render_report, write_fit_json};
use crate::lab::sweep::{cached_dtn_data, cell_seed};
use crate::lab::{fit_stability, run_sweep, workers_from_env, SweepConfig};
use crate::reconstruction::reconstruct;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "cgolab", version, about = "CGO probing, low-pass inversion and stability sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// psi decay battery: ||psi||_{H^s} against |xi| = a for several k.
    CgoCheck {
        /// TOML with [grid], [potential], k_list, a_list, s.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// q = 0 plane-wave manufactured solution on a sequence of grids.
    ForwardCheck {
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [16usize, 32, 64])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
    },
    /// One Fourier probe of q1 - q2 at r * omega.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 1.0])]
        omega: Vec<f64>,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// One reconstruction cell; writes q_hat, metadata and samples.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        /// Output directory; defaults to `<output_dir>/reconstruct`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full k x noise sweep with records, fit and plots.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit both stability regimes to a records CSV.
    Fit {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        /// Defaults to `fit.json` next to the records.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV, fit JSON and SVG plots from a records CSV.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn exit_code(e: &LabError) -> u8 {
    match e {
        LabError::Config(_) | LabError::Format(_) | LabError::InsufficientData(_) | LabError::InvalidFrequencyRange { .. } => {
            EXIT_CONFIG
        }
        _ => EXIT_FAILURE,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.tag());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn omega3(v: &[f64]) -> Result<Vec3> {
    let n = (v.iter().map(|c| c * c).sum::<f64>()).sqrt();
    if v.len() != 3 || !(n > 0.0) {
        return Err(LabError::config("omega needs three components, not all zero"));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn first_or(value: Option<f64>, list: &[f64]) -> f64 {
    value.unwrap_or(list[0])
}

pub fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::CgoCheck { config } => {
            let cfg: CgoCheckConfig = match config {
                Some(p) => toml::from_str(&read_config(&p)?).map_err(|e| LabError::config(e.to_string()))?,
                None => CgoCheckConfig::default(),
            };
            let rows = run_cgo_check(&cfg)?;
            println!("{:>6} {:>8} {:>14} {:>5} {:>10} {:>8}", "k", "a", "psi_H^s", "iter", "residual", "secs");
            for r in &rows {
                println!(
                    "{:>6} {:>8} {:>14.6e} {:>5} {:>10.2e} {:>8.2}",
                    r.k, r.a, r.psi_h_s_norm, r.iterations, r.residual, r.seconds
                );
            }
            for k in &cfg.k_list {
                let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.k == *k).map(|r| (r.a, r.psi_h_s_norm)).collect();
                println!("k = {k}: log-log slope {:.3}", log_log_slope(&pts));
            }
            Ok(EXIT_OK)
        }
        Command::ForwardCheck { extent, sizes, k } => {
            let rows = plane_wave_convergence(extent, &sizes, k, [0.6, 0.0, 0.8])?;
            println!("{:>5} {:>10} {:>12} {:>8}", "N", "h", "max_error", "secs");
            for r in &rows {
                println!("{:>5} {:>10.5} {:>12.4e} {:>8.2}", r.n, r.h, r.max_error, r.seconds);
            }
            for (w, o) in rows.windows(2).zip(observed_orders(&rows)) {
                println!("order {} -> {}: {o:.3}", w[0].n, w[1].n);
            }
            Ok(EXIT_OK)
        }
        Command::Probe { config, k, r, omega, a, noise } => {
            let cfg = SweepConfig::load(&config)?;
            let k = first_or(k, &cfg.k_list);
            let noise = first_or(noise, &cfg.noise_list);
            let omega = omega3(&omega)?;
            let (q1, q2) = cfg.potentials()?;
            let mode = cfg.reconstruction.mode;
            let boundary = match mode {
                ProbeMode::Boundary => {
                    let d = cached_dtn_data(&q1, &q2, k, cfg.reconstruction.degree_cap, None)?;
                    let spec = NoiseSpec { epsilon: noise, seed: cell_seed(cfg.seed, 0, 0), model: cfg.reconstruction.noise_model };
                    Some(BoundaryData { lambda1: d.lambda1, lambda2: add_noise_with(&d.lambda2, &spec) })
                }
                ProbeMode::Oracle => None,
            };
            let setup = ProbeSetup::new(&q1, &q2, boundary.as_ref())?.with_c_emp(cfg.reconstruction.c_emp);
            let sample = fourier_probe(&setup, k, r, omega, a, mode)?;
            let q_tilde = q1.field.sub(&q2.field)?;
            let exact = fourier_transform_at(&q_tilde, [r * omega[0], r * omega[1], r * omega[2]]);
            println!("mode            {}", mode.as_str());
            println!("probe           {:.10e} {:+.10e}i", sample.value.re, sample.value.im);
            println!("F(q1-q2)        {:.10e} {:+.10e}i", exact.re, exact.im);
            println!("abs difference  {:.4e}", (sample.value - exact).norm());
            println!("error estimate  {:.4e}", sample.error_estimate.unwrap_or(f64::NAN));
            println!("max psi H^s     {:.4e}", sample.psi_h_s_norm);
            if sample.basis_truncation {
                println!("warning: CGO trace poorly captured by the boundary basis");
            }
            Ok(EXIT_OK)
        }
        Command::Reconstruct { config, k, noise, out } => {
            let cfg = SweepConfig::load(&config)?;
            let k = first_or(k, &cfg.k_list);
            let noise = first_or(noise, &cfg.noise_list);
            let (q1, q2) = cfg.potentials()?;
            let r_param = cfg.resolve_r(&q1, &q2)?;
            let spec = (noise > 0.0).then(|| NoiseSpec {
                epsilon: noise,
                seed: cell_seed(cfg.seed, 0, 0),
                model: cfg.reconstruction.noise_model,
            });
            let res = reconstruct(&q1, &q2, &cfg.reconstruct_options(k, r_param, spec), None)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.join("reconstruct"));
            let mut paths = write_reconstruction(&dir, "reconstruction", &res)?;
            paths.extend(write_samples(&dir, "samples", &res.samples)?);
            println!(
                "k={} noise={} regime={} T={:.4} dist_proxy={:.4e} error_h_minus_s={:.6e}",
                res.k,
                noise,
                res.policy.regime.as_str(),
                res.policy.t,
                res.dist_proxy,
                res.error_h_minus_s
            );
            print_paths(&paths);
            Ok(if res.diagnostics.failed_samples > 0 { EXIT_PARTIAL } else { EXIT_OK })
        }
        Command::Sweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let workers = workers_from_env()?;
            let outcome = run_sweep(&cfg, workers)?;
            for r in &outcome.records {
                println!(
                    "k={:<6} noise={:<10e} {:<7} regime={:<8} T={:<8.4} error={:.6e} {}",
                    r.k, r.noise, r.status, r.regime, r.t, r.error_h_minus_s, r.error_tag
                );
            }
            let fit = fit_stability(&outcome.records, cfg.reconstruction.s).ok();
            let paths = render_report(&outcome.records, fit.as_ref(), &outcome.run_dir)?;
            println!("resumed {} of {} cells", outcome.resumed, outcome.records.len());
            print_paths(&paths);
            Ok(if outcome.failures() > 0 { EXIT_PARTIAL } else { EXIT_OK })
        }
        Command::Fit { records, s, out } => {
            let recs = read_records_csv(&records)?;
            let fit = fit_stability(&recs, s)?;
            let path = out.unwrap_or_else(|| records.with_file_name("fit.json"));
            write_fit_json(&path, &fit)?;
            for (name, f) in [("lipschitz", &fit.lipschitz), ("logarithmic", &fit.logarithmic)] {
                println!(
                    "{name:<12} slope {:+.4} (expected {:+.2}, accepted [{:.2}, {:.2}]) residual {:.3e} points {} {}",
                    f.slope,
                    f.expected,
                    f.accepted_range[0],
                    f.accepted_range[1],
                    f.residual_rms,
                    f.points,
                    if f.conforming { "ok" } else { "NON-CONFORMING" }
                );
            }
            println!("envelope constant {:.4e}", fit.envelope_constant);
            print_paths(&[path]);
            Ok(EXIT_OK)
        }
        Command::Report { records, s, out } => {
            let recs = read_records_csv(&records)?;
            let fit = fit_stability(&recs, s).ok();
            let paths = render_report(&recs, fit.as_ref(), &out)?;
            print_paths(&paths);
            Ok(if recs.iter().any(|r| !r.is_ok()) { EXIT_PARTIAL } else { EXIT_OK })
        }
    }
}

fn read_config(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| LabError::config(format!("cannot read {}: {e}", p.display())))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}
