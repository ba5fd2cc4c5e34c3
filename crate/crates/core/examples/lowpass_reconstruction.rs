//! Reconstruct q1 - q2 from oracle samples and write the field and metadata.

use cgolab::alessandrini::ProbeMode;
use cgolab::forward::{NoiseModel, NoiseSpec};
use cgolab::grid::{sample_potential, Grid, PotentialSpec};
use cgolab::io::write_reconstruction;
use cgolab::reconstruction::{reconstruct, ReconstructOptions};

fn main() -> cgolab::Result<()> {
    let grid = Grid::new(0.55, 16)?;
    let q1 = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 5.0), &grid, 2.0)?;
    let q2 = sample_potential(&PotentialSpec::Zero, &grid, 2.0)?;
    for noise in [1e-2, 1e-6] {
        let opts = ReconstructOptions {
            mode: ProbeMode::Oracle,
            radial_count: 8,
            noise: Some(NoiseSpec { epsilon: noise, seed: 1, model: NoiseModel::Dense }),
            ..ReconstructOptions::new(1.0, 3.0)
        };
        let res = reconstruct(&q1, &q2, &opts, None)?;
        println!(
            "noise {noise:e}: regime {} T={:.3} error_H^-2 {:.4e} (relative {:.3})",
            res.policy.regime.as_str(),
            res.policy.t,
            res.error_h_minus_s,
            res.error_h_minus_s / res.diagnostics.q_tilde_h_minus_s
        );
        let dir = std::env::temp_dir().join("cgolab_example");
        for p in write_reconstruction(&dir, &format!("noise_{noise:e}"), &res)? {
            println!("  wrote {}", p.display());
        }
    }
    Ok(())
}
