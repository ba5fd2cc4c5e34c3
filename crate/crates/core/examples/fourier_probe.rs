//! Recover one Fourier coefficient of q1 - q2 from CGO pairs, with and without boundary data.

use cgolab::alessandrini::{fourier_probe, BoundaryData, ProbeMode, ProbeSetup};
use cgolab::grid::{fourier_transform_at, sample_potential, Grid, PotentialSpec};
use cgolab::reconstruction::DtnData;

fn main() -> cgolab::Result<()> {
    let grid = Grid::new(0.55, 16)?;
    let q1 = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 5.0), &grid, 2.0)?;
    let q2 = sample_potential(&PotentialSpec::Zero, &grid, 2.0)?;
    let (k, r, omega) = (1.0, 2.0, [0.0, 0.6, 0.8]);
    let exact = fourier_transform_at(&q1.field.sub(&q2.field)?, [0.0, r * 0.6, r * 0.8]);
    println!("F(q1 - q2)(r omega) = {exact:.6}");

    let oracle = ProbeSetup::new(&q1, &q2, None)?;
    for a in [4.0, 16.0, 64.0] {
        let s = fourier_probe(&oracle, k, r, omega, a, ProbeMode::Oracle)?;
        println!("oracle   a={a:<4} value {:.6} |diff| {:.3e}", s.value, (s.value - exact).norm());
    }

    let dtn = DtnData::compute(&q1, &q2, k, 4)?;
    let data = BoundaryData { lambda1: dtn.lambda1, lambda2: dtn.lambda2 };
    let boundary = ProbeSetup::new(&q1, &q2, Some(&data))?;
    let s = fourier_probe(&boundary, k, r, omega, 3.0, ProbeMode::Boundary)?;
    println!("boundary a=3    value {:.6} |diff| {:.3e}", s.value, (s.value - exact).norm());
    Ok(())
}
