//! A small oracle-mode sweep over (k, noise), followed by the slope fit and plots.

use cgolab::alessandrini::ProbeMode;
use cgolab::grid::PotentialSpec;
use cgolab::lab::config::{GridConfig, ReconstructionConfig};
use cgolab::lab::{fit_stability, render_report, run_sweep, workers_from_env, SweepConfig};

fn main() -> cgolab::Result<()> {
    let cfg = SweepConfig {
        seed: 3,
        output_dir: std::env::temp_dir().join("cgolab_sweep_example"),
        k_list: vec![1.0, 2.0, 4.0],
        noise_list: vec![1e-2, 1e-3, 1e-4, 1e-6],
        grid: GridConfig { extent: 0.55, n: 16 },
        q1: PotentialSpec::gaussian([0.0; 3], 0.2, 5.0),
        q2: PotentialSpec::Zero,
        reconstruction: ReconstructionConfig {
            r_param: Some(3.0),
            mode: ProbeMode::Oracle,
            radial_count: 8,
            ..ReconstructionConfig::default()
        },
    };
    let out = run_sweep(&cfg, workers_from_env()?)?;
    for r in &out.records {
        println!("k={:<4} noise={:<8e} {:<8} T={:<7.3} error={:.4e}", r.k, r.noise, r.regime, r.t, r.error_h_minus_s);
    }
    let fit = fit_stability(&out.records, 2.0)?;
    println!("lipschitz slope {:.3}, logarithmic slope {:.3}", fit.lipschitz.slope, fit.logarithmic.slope);
    for p in render_report(&out.records, Some(&fit), &out.run_dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
