//! Self-checks exposed by the CLI: CGO decay and forward-solver convergence.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cgo::{build_cgo, make_zeta_pair, Vec3};
use crate::error::{LabError, Result};
use crate::forward::solve_dirichlet;
use crate::grid::{boundary_trace, sample_potential, FieldKind, Grid, Potential, PotentialSpec, ScalarField};
use crate::lab::config::GridConfig;
use crate::lab::fit::linear_fit;

fn default_k_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}
fn default_a_list() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

/// Settings of the `psi` decay battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgoCheckConfig {
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<f64>,
    #[serde(default = "default_a_list")]
    pub a_list: Vec<f64>,
    #[serde(default = "crate::lab::checks::default_s")]
    pub s: f64,
}

pub(crate) fn default_s() -> f64 {
    2.0
}

impl Default for CgoCheckConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig { extent: 1.0, n: 48 },
            potential: PotentialSpec::gaussian([0.0; 3], 0.15, 1.0),
            k_list: default_k_list(),
            a_list: default_a_list(),
            s: default_s(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiDecayRow {
    pub k: f64,
    pub a: f64,
    pub psi_h_s_norm: f64,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
}

/// `||psi||_{H^s}` for `zeta1` of `make_zeta_pair(k, 0, e3, a)` over the battery.
pub fn psi_decay_battery(q: &Potential, k_list: &[f64], a_list: &[f64]) -> Result<Vec<PsiDecayRow>> {
    let mut rows = Vec::new();
    for &k in k_list {
        for &a in a_list {
            let start = Instant::now();
            let zeta = make_zeta_pair(k, 0.0, [0.0, 0.0, 1.0], a, None)?.zeta1;
            let sol = build_cgo(q, &zeta, 1e-10, 200)?;
            rows.push(PsiDecayRow {
                k,
                a,
                psi_h_s_norm: sol.psi_h_s_norm,
                iterations: sol.iterations,
                residual: sol.residual,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

/// Slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|(a, b)| (a.ln(), b.ln())).unzip();
    linear_fit(&x, &y).0
}

pub fn run_cgo_check(cfg: &CgoCheckConfig) -> Result<Vec<PsiDecayRow>> {
    if !(cfg.s > 1.5) {
        return Err(LabError::config(format!("s must exceed 1.5, got {}", cfg.s)));
    }
    let grid = cfg.grid.build()?;
    let q = sample_potential(&cfg.potential, &grid, cfg.s)?;
    psi_decay_battery(&q, &cfg.k_list, &cfg.a_list)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub max_error: f64,
    pub seconds: f64,
}

pub fn plane_wave(grid: Grid, k: f64, direction: Vec3) -> ScalarField {
    ScalarField::from_fn(grid, FieldKind::Interior, |x| {
        Complex64::from_polar(1.0, k * (direction[0] * x[0] + direction[1] * x[1] + direction[2] * x[2]))
    })
}

/// Max-norm error of the `q = 0` Dirichlet solve with plane-wave data, per grid size.
pub fn plane_wave_convergence(extent: f64, sizes: &[usize], k: f64, direction: Vec3) -> Result<Vec<ConvergenceRow>> {
    let nrm = (direction.iter().map(|d| d * d).sum::<f64>()).sqrt();
    if !(nrm > 0.0) {
        return Err(LabError::config("plane-wave direction must be non-zero"));
    }
    let d = direction.map(|c| c / nrm);
    sizes
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let grid = Grid::new(extent, n)?;
            let q = sample_potential(&PotentialSpec::Zero, &grid, 2.0)?;
            let exact = plane_wave(grid, k, d);
            let u = solve_dirichlet(&q, k, &boundary_trace(&exact), 1e-12)?;
            Ok(ConvergenceRow {
                n,
                h: grid.spacing(),
                max_error: u.sub(&exact)?.max_abs(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive rows.
pub fn observed_orders(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2).map(|w| (w[0].max_error / w[1].max_error).ln() / (w[0].h / w[1].h).ln()).collect()
}
