//! Assemble Dirichlet-to-Neumann matrices, perturb one with noise and compare.

use cgolab::forward::{add_noise, dist_between, dtn_matrix};
use cgolab::grid::{sample_potential, Grid, PotentialSpec};

fn main() -> cgolab::Result<()> {
    let grid = Grid::new(0.55, 12)?;
    let (k, cap) = (1.0, 3);
    let q1 = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 5.0), &grid, 2.0)?;
    let q0 = sample_potential(&PotentialSpec::Zero, &grid, 2.0)?;
    let l1 = dtn_matrix(&q1, k, cap)?;
    let l0 = dtn_matrix(&q0, k, cap)?;
    println!("basis size {}, ||L1||_w = {:.4}, asymmetry {:.2e}", l1.dim(), l1.weighted_norm(), l1.asymmetry());
    println!("dist(L1, L0) = {:.4e}", dist_between(&l1, &l0, &l0)?);
    for eps in [1e-2, 1e-4] {
        let noisy = add_noise(&l1, eps, 7);
        println!("eps = {eps:e}: dist(noisy, L1) = {:.4e}", dist_between(&noisy, &l1, &l0)?);
    }
    Ok(())
}
