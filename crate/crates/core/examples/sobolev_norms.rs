//! Sample a Gaussian bump and print its spectral Sobolev norms.

use cgolab::grid::{padded_sobolev_norm, sample_potential, Grid, PotentialSpec};

fn main() -> cgolab::Result<()> {
    let grid = Grid::new(1.0, 32)?;
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 1.0), &grid, 2.0)?;
    println!("grid N={} h={:.4} period={:.2}", grid.n(), grid.spacing(), grid.period());
    println!("||q||_H^2 = {:.6}", q.h_s_norm);
    for pad in [1, 2, 4] {
        println!("||q||_H^-2 with padding {pad}: {:.6e}", padded_sobolev_norm(&q.field, -2.0, pad)?);
    }
    Ok(())
}
