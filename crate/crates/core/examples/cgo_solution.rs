//! Build CGO solutions for increasing |xi| and watch psi shrink like 1/|xi|.

use cgolab::cgo::{build_cgo, make_zeta_pair};
use cgolab::grid::{sample_potential, Grid, PotentialSpec};

fn main() -> cgolab::Result<()> {
    let grid = Grid::new(1.0, 32)?;
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 1.0), &grid, 2.0)?;
    let k = 2.0;
    println!("{:>6} {:>12} {:>6} {:>10}", "a", "psi_H^2", "iter", "residual");
    for a in [8.0, 16.0, 32.0, 64.0] {
        let zeta = make_zeta_pair(k, 0.0, [0.0, 0.0, 1.0], a, None)?.zeta1;
        let sol = build_cgo(&q, &zeta, 1e-10, 200)?;
        println!("{a:>6} {:>12.4e} {:>6} {:>10.2e}", sol.psi_h_s_norm, sol.iterations, sol.residual);
    }
    Ok(())
}
