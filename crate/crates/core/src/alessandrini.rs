//! The pairing `int (q2 - q1) u1 u2` and the Fourier probe that turns CGO
//! pairs into samples of `F q~(r omega)`, `q~ = q1 - q2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgo::{build_cgo, make_zeta_pair, CgoSolution, Vec3};
use crate::error::{LabError, Result};
use crate::forward::{CauchyPair, DtnMatrix, NoiseSpec};
use crate::grid::{face_node, BoundaryField, Potential, ScalarField, FACES};
use crate::quadrature::{gauss_legendre, SphereDesign};
use crate::reconstruction::choose_a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// Volume quadrature against the constructed CGO corrections.
    Oracle,
    /// Bilinear form of the DtN difference on projected CGO traces.
    Boundary,
}

impl ProbeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeMode::Oracle => "oracle",
            ProbeMode::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSample {
    pub r: f64,
    pub omega: Vec3,
    pub a: f64,
    pub value: Complex64,
    pub mode: ProbeMode,
    pub error_estimate: Option<f64>,
    /// Polar quadrature weight `w_r w_omega r^2`.
    pub weight: f64,
    /// Set when a CGO trace keeps less than 90% of its energy in the boundary basis.
    pub basis_truncation: bool,
    /// Larger of the two `||psi_l||_{H^s}`.
    pub psi_h_s_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub r: f64,
    pub omega: Vec3,
    pub weight: f64,
    pub tag: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSampleSet {
    pub samples: Vec<FourierSample>,
    pub t_max: f64,
    pub k: f64,
    pub r_param: f64,
    pub noise: f64,
    pub mode: ProbeMode,
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub design: SphereDesign,
    pub failures: Vec<SampleFailure>,
}

impl FourierSampleSet {
    pub fn truncation_warnings(&self) -> usize {
        self.samples.iter().filter(|s| s.basis_truncation).count()
    }
}

/// `int (q2 - q1) u1 u2 dx` by the midpoint rule.
pub fn alessandrini_lhs(q1: &Potential, q2: &Potential, u1: &ScalarField, u2: &ScalarField) -> Result<Complex64> {
    q1.field.check_grid(&q2.field)?;
    q1.field.check_grid(u1)?;
    q1.field.check_grid(u2)?;
    let h3 = q1.grid().spacing().powi(3);
    Ok(q1
        .field
        .values
        .iter()
        .zip(&q2.field.values)
        .zip(u1.values.iter().zip(&u2.values))
        .map(|((a, b), (x, y))| (b - a) * x * y)
        .sum::<Complex64>()
        * h3)
}

/// `||(u1, du1)|| ||(u2, du2)|| dist` in the surrogate trace norms.
pub fn alessandrini_bound(c1: &CauchyPair, c2: &CauchyPair, dist_value: f64) -> f64 {
    c1.norm_cache * c2.norm_cache * dist_value
}

/// DtN data for boundary-mode probing: `lambda2` may carry measurement noise.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub lambda1: DtnMatrix,
    pub lambda2: DtnMatrix,
}

/// Shared inputs for a batch of probes.
pub struct ProbeSetup<'a> {
    pub q1: &'a Potential,
    pub q2: &'a Potential,
    pub boundary: Option<&'a BoundaryData>,
    /// Calibrated constant in the `C/a` probe error estimate.
    pub c_emp: f64,
    pub cgo_tol: f64,
    pub cgo_max_iter: usize,
    q_tilde_l1: f64,
}

/// Default calibration constant used before a family-specific fit is available.
pub const DEFAULT_C_EMP: f64 = 1.0;

impl<'a> ProbeSetup<'a> {
    pub fn new(q1: &'a Potential, q2: &'a Potential, boundary: Option<&'a BoundaryData>) -> Result<Self> {
        q1.field.check_grid(&q2.field)?;
        if let Some(b) = boundary {
            if b.lambda1.basis.grid != q1.grid() {
                return Err(LabError::config("DtN data and potentials use different grids"));
            }
        }
        let h3 = q1.grid().spacing().powi(3);
        let q_tilde_l1 =
            q1.field.values.iter().zip(&q2.field.values).map(|(a, b)| (a - b).norm()).sum::<f64>() * h3;
        Ok(Self { q1, q2, boundary, c_emp: DEFAULT_C_EMP, cgo_tol: 1e-10, cgo_max_iter: 200, q_tilde_l1 })
    }

    pub fn with_c_emp(mut self, c_emp: f64) -> Self {
        self.c_emp = c_emp;
        self
    }

    /// `int |q1 - q2| dx`.
    pub fn q_tilde_l1(&self) -> f64 {
        self.q_tilde_l1
    }
}

fn cgo_trace(sol: &CgoSolution) -> BoundaryField {
    let grid = sol.psi.grid;
    let n = grid.n();
    let z = sol.zeta.components();
    let mut out = BoundaryField::zeros(grid);
    for (f, face) in out.faces.iter_mut().enumerate() {
        for b in 0..n {
            for a in 0..n {
                let idx = face_node(&grid, f, a, b, 0);
                let (i, j, k) = grid.unravel(idx);
                let x = grid.point(i, j, k);
                let arg = z[0] * x[0] + z[1] * x[1] + z[2] * x[2];
                face[a + n * b] = (Complex64::i() * arg).exp() * (1.0 + sol.psi.values[idx]);
            }
        }
    }
    debug_assert_eq!(out.faces.len(), FACES.len());
    out
}

/// Probe `F q~(r omega)` with the CGO pair of parameter `a`.
pub fn fourier_probe(setup: &ProbeSetup, k: f64, r: f64, omega: Vec3, a: f64, mode: ProbeMode) -> Result<FourierSample> {
    let pair = make_zeta_pair(k, r, omega, a, None)?;
    let s1 = build_cgo(setup.q1, &pair.zeta1, setup.cgo_tol, setup.cgo_max_iter)?;
    let s2 = build_cgo(setup.q2, &pair.zeta2, setup.cgo_tol, setup.cgo_max_iter)?;
    let grid = setup.q1.grid();
    let mut basis_truncation = false;
    let value = match mode {
        ProbeMode::Oracle => {
            // u1 u2 = exp(-i r omega.x) (1 + psi1)(1 + psi2)
            let xs = grid.coords();
            let h3 = grid.spacing().powi(3);
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, (q1, q2)) in setup.q1.field.values.iter().zip(&setup.q2.field.values).enumerate() {
                let d = q1 - q2;
                if d.re == 0.0 && d.im == 0.0 {
                    continue;
                }
                let (i, j, kk) = grid.unravel(idx);
                let ph = -r * (omega[0] * xs[i] + omega[1] * xs[j] + omega[2] * xs[kk]);
                acc += d * Complex64::from_polar(1.0, ph) * (1.0 + s1.psi.values[idx]) * (1.0 + s2.psi.values[idx]);
            }
            acc * h3
        }
        ProbeMode::Boundary => {
            let data = setup
                .boundary
                .ok_or_else(|| LabError::config("boundary-mode probing needs DtN matrices"))?;
            let basis = &data.lambda1.basis;
            let (t1, t2) = (cgo_trace(&s1), cgo_trace(&s2));
            basis_truncation = basis.captured_energy(&t1) < 0.9 || basis.captured_energy(&t2) < 0.9;
            let c1 = basis.coords(&t1);
            let c2 = basis.coords(&t2);
            let diff = &data.lambda2.entries - &data.lambda1.entries;
            (c2.transpose() * diff * c1)[(0, 0)]
        }
    };
    Ok(FourierSample {
        r,
        omega,
        a,
        value,
        mode,
        error_estimate: Some(setup.c_emp / a * setup.q_tilde_l1),
        weight: 0.0,
        basis_truncation,
        psi_h_s_norm: s1.psi_h_s_norm.max(s2.psi_h_s_norm),
    })
}

/// Fraction of failed probes above which acquisition gives up.
pub const MAX_FAILURE_FRACTION: f64 = 0.2;

/// Polar sampling request for [`acquire_samples`].
#[derive(Clone, Debug)]
pub struct SamplingPlan {
    pub k: f64,
    pub r_param: f64,
    pub t_max: f64,
    pub radial_count: usize,
    pub design: SphereDesign,
    pub mode: ProbeMode,
    pub noise: f64,
}

/// One probe per Gauss-Legendre radius on `[0, T]` and design direction, with
/// `a = choose_a(r, k, R)`.
pub fn acquire_samples(setup: &ProbeSetup, plan: &SamplingPlan) -> Result<FourierSampleSet> {
    if plan.radial_count == 0 || plan.design.is_empty() {
        return Err(LabError::config("sampling plan needs at least one radius and one direction"));
    }
    if !(plan.t_max >= 0.0) {
        return Err(LabError::config(format!("cutoff must be non-negative, got {}", plan.t_max)));
    }
    let (radii, radial_weights) = gauss_legendre(plan.radial_count, 0.0, plan.t_max)?;
    let nodes: Vec<(usize, usize)> =
        (0..radii.len()).flat_map(|i| (0..plan.design.len()).map(move |j| (i, j))).collect();
    let results: Vec<(usize, usize, Result<FourierSample>)> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let r = radii[i];
            let a = choose_a(r, plan.k, plan.r_param);
            let out = fourier_probe(setup, plan.k, r, plan.design.directions[j], a, plan.mode).map(|mut s| {
                s.weight = radial_weights[i] * plan.design.weights[j] * r * r;
                s
            });
            (i, j, out)
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, j, res) in results {
        match res {
            Ok(s) => samples.push(s),
            Err(e) => failures.push(SampleFailure {
                r: radii[i],
                omega: plan.design.directions[j],
                weight: radial_weights[i] * plan.design.weights[j] * radii[i] * radii[i],
                tag: e.tag().to_string(),
                message: e.to_string(),
            }),
        }
    }
    let total = nodes.len();
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(LabError::InsufficientData(format!(
            "{} of {} probes failed; first: {}",
            failures.len(),
            total,
            failures[0].message
        )));
    }
    Ok(FourierSampleSet {
        samples,
        t_max: plan.t_max,
        k: plan.k,
        r_param: plan.r_param,
        noise: plan.noise,
        mode: plan.mode,
        radii,
        radial_weights,
        design: plan.design.clone(),
        failures,
    })
}

/// Largest `a |probe - F q~| / int |q~|` over `a_values` in oracle mode at
/// `(r, omega)`: the family constant in the `C/a` probe error.
pub fn calibrate_c_emp(setup: &ProbeSetup, k: f64, r: f64, omega: Vec3, a_values: &[f64]) -> Result<f64> {
    let q_tilde = setup.q1.field.sub(&setup.q2.field)?;
    let exact = crate::grid::fourier_transform_at(&q_tilde, [r * omega[0], r * omega[1], r * omega[2]]);
    let l1 = setup.q_tilde_l1.max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for a in a_values {
        let s = fourier_probe(setup, k, r, omega, *a, ProbeMode::Oracle)?;
        worst = worst.max(a * (s.value - exact).norm() / l1);
    }
    Ok(worst)
}

/// Noise metadata carried with a sample set.
pub fn noise_level(noise: Option<&NoiseSpec>) -> f64 {
    noise.map(|n| n.epsilon).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{fourier_transform_at, sample_potential, Grid, PotentialSpec};

    #[test]
    fn identical_potentials_probe_zero() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 1.0), &g, 2.0).unwrap();
        let setup = ProbeSetup::new(&q, &q, None).unwrap();
        let s = fourier_probe(&setup, 1.0, 0.5, [0.0, 0.0, 1.0], 4.0, ProbeMode::Oracle).unwrap();
        assert_eq!(s.value.norm(), 0.0);
    }

    #[test]
    fn oracle_probe_close_to_fourier_transform() {
        let g = Grid::new(1.0, 24).unwrap();
        let q1 = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 1.0), &g, 2.0).unwrap();
        let q0 = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        let setup = ProbeSetup::new(&q1, &q0, None).unwrap();
        let omega = [0.0, 0.6, 0.8];
        let exact = fourier_transform_at(&q1.field, [0.0, 0.6, 0.8]);
        let s = fourier_probe(&setup, 1.0, 1.0, omega, 40.0, ProbeMode::Oracle).unwrap();
        assert!((s.value - exact).norm() < 0.05 * exact.norm(), "{} vs {}", s.value, exact);
    }

    #[test]
    fn lhs_vanishes_for_equal_potentials() {
        let g = Grid::new(1.0, 8).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 1.0), &g, 2.0).unwrap();
        let u = ScalarField::from_fn(g, crate::grid::FieldKind::Interior, |x| Complex64::new(x[0], 1.0));
        assert_eq!(alessandrini_lhs(&q, &q, &u, &u).unwrap().norm(), 0.0);
    }
}
