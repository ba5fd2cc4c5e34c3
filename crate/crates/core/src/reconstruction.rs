//! Frequency splitting, low-pass synthesis and `H^{-s}` error evaluation.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alessandrini::{acquire_samples, BoundaryData, FourierSampleSet, ProbeMode, ProbeSetup, SamplingPlan};
use crate::error::{LabError, Result};
use crate::forward::{add_noise_with, dist_between, dtn_matrix_with, BoundaryBasis, DtnMatrix, HelmholtzSolver, NoiseSpec};
use crate::grid::{
    fourier_transform_at, padded_sobolev_norm, sample_potential, FieldKind, Grid, Potential, PotentialSpec,
    ScalarField, ZERO,
};
use crate::quadrature::{gauss_legendre, SphereDesign, SphereDesignKind};

/// `a = R` for `r <= k + R`, `a = r` beyond.
pub fn choose_a(r: f64, k: f64, r_param: f64) -> f64 {
    if r <= k + r_param {
        r_param
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `k + R <= p log(1/A)`: cutoff `T = p log(1/A)`.
    CaseI,
    /// `k + R > p log(1/A)`: cutoff `T = k + R`.
    CaseII,
    /// Noise-free data; user-capped cutoff.
    Exact,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::CaseI => "case_i",
            Regime::CaseII => "case_ii",
            Regime::Exact => "exact",
        }
    }
}

/// Which power of the distance plays the role of `A` in the cutoff rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    #[default]
    DistSquared,
    Dist,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub r_param: f64,
    pub p: f64,
    pub regime: Regime,
    pub t: f64,
    /// `A`, absent on the exact-data path.
    pub a_value: Option<f64>,
}

pub fn choose_cutoff(k: f64, dist_proxy: f64, r_param: f64, p: f64) -> Result<CutoffPolicy> {
    choose_cutoff_scaled(k, dist_proxy, r_param, p, NoiseScale::DistSquared)
}

pub fn choose_cutoff_scaled(k: f64, dist_proxy: f64, r_param: f64, p: f64, scale: NoiseScale) -> Result<CutoffPolicy> {
    if !(dist_proxy > 0.0) {
        return Err(LabError::config("dist_proxy = 0 means exact data: use the capped cutoff path"));
    }
    if dist_proxy > (-1.0f64).exp() {
        return Err(LabError::config(format!("dist_proxy = {dist_proxy} exceeds 1/e")));
    }
    if !(p > 0.0) || !(r_param > 0.0) {
        return Err(LabError::config(format!("need p > 0 and R > 0, got p={p}, R={r_param}")));
    }
    let a_value = match scale {
        NoiseScale::DistSquared => dist_proxy * dist_proxy,
        NoiseScale::Dist => dist_proxy,
    };
    let t_log = p * (1.0 / a_value).ln();
    let (regime, t) = if k + r_param < t_log { (Regime::CaseI, t_log) } else { (Regime::CaseII, k + r_param) };
    Ok(CutoffPolicy { r_param, p, regime, t, a_value: Some(a_value) })
}

/// Default extra bandwidth on the exact-data path, `T = k + 8`.
pub const EXACT_DATA_EXTRA: f64 = 8.0;

pub fn exact_cutoff(k: f64, r_param: f64, p: f64, t_cap: Option<f64>) -> CutoffPolicy {
    CutoffPolicy { r_param, p, regime: Regime::Exact, t: t_cap.unwrap_or(k + EXACT_DATA_EXTRA), a_value: None }
}

/// `(2 pi)^{-3} w v` per sample: the plane-wave content of the synthesis.
pub fn plane_wave_components(samples: &FourierSampleSet) -> Vec<([f64; 3], Complex64)> {
    let c = (2.0 * PI).powi(-3);
    samples
        .samples
        .iter()
        .map(|s| ([s.r * s.omega[0], s.r * s.omega[1], s.r * s.omega[2]], s.value * (c * s.weight)))
        .collect()
}

/// Synthesis on a grid plus the size of the discarded imaginary part.
#[derive(Clone, Debug)]
pub struct LowpassOutput {
    pub field: ScalarField,
    pub imag_max: f64,
}

/// `q_hat(x) = (2 pi)^{-3} sum w_ij v_ij exp(i r_i omega_j.x)`, real part.
pub fn lowpass_invert(samples: &FourierSampleSet, grid: &Grid) -> Result<ScalarField> {
    lowpass_invert_detailed(samples, grid).map(|o| o.field)
}

pub fn lowpass_invert_detailed(samples: &FourierSampleSet, grid: &Grid) -> Result<LowpassOutput> {
    if samples.design.len() < 6 || samples.radii.len() < 4 {
        return Err(LabError::config(format!(
            "polar design too sparse: {} directions, {} radii (need >= 6 and >= 4)",
            samples.design.len(),
            samples.radii.len()
        )));
    }
    let n = grid.n();
    let xs = grid.coords();
    let waves = plane_wave_components(samples);
    let planes: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut plane = vec![ZERO; n * n];
            for (xi, c) in &waves {
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let ex: Vec<Complex64> = xs.iter().map(|x| Complex64::from_polar(1.0, xi[0] * x)).collect();
                let cz = c * Complex64::from_polar(1.0, xi[2] * xs[k]);
                for (j, y) in xs.iter().enumerate() {
                    let cy = cz * Complex64::from_polar(1.0, xi[1] * y);
                    for (p, e) in plane[j * n..(j + 1) * n].iter_mut().zip(&ex) {
                        *p += cy * e;
                    }
                }
            }
            plane
        })
        .collect();
    let mut imag_max: f64 = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    for plane in planes {
        for v in plane {
            imag_max = imag_max.max(v.im.abs());
            values.push(Complex64::new(v.re, 0.0));
        }
    }
    Ok(LowpassOutput { field: ScalarField { grid: *grid, values, kind: FieldKind::Periodic }, imag_max })
}

/// Quadrature settings for the tail `r > T` of the polar error integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorOptions {
    pub tail_radial: usize,
    pub tail_polar: usize,
    /// Upper bound on the zero-padded cube size for the torus surrogate.
    pub torus_max_points: usize,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        Self { tail_radial: 24, tail_polar: 8, torus_max_points: 128 }
    }
}

/// The polar error split: `I1` over sampled `r <= k + R`, `I2` over sampled
/// `k + R < r <= T` (absent when no sample lies there), `I3` the tail `r > T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub error_h_minus_s: f64,
    pub i1: f64,
    pub i2: Option<f64>,
    pub i3: f64,
    /// Torus-spectral surrogate of `||q~ - q_hat||_{H^{-s}}` on the zero-padded cube.
    pub torus_surrogate: f64,
}

/// `||q~ - q_hat||_{H^{-s}}` by the polar formula: sampled values stand in for
/// `F q_hat` on the polar nodes and `F q_hat = 0` beyond `T`.
pub fn error_h_minus_s(
    q_tilde: &ScalarField,
    samples: &FourierSampleSet,
    q_hat: &ScalarField,
    s: f64,
    opts: &ErrorOptions,
) -> Result<ErrorBreakdown> {
    q_tilde.check_grid(q_hat)?;
    let grid = q_tilde.grid;
    let split = samples.k + samples.r_param;
    let weight = |r: f64| (1.0 + r * r).powf(-s);
    let ft = |r: f64, w: [f64; 3]| fourier_transform_at(q_tilde, [r * w[0], r * w[1], r * w[2]]);
    let mut terms: Vec<(f64, f64)> = samples
        .samples
        .par_iter()
        .map(|smp| (smp.r, smp.weight * weight(smp.r) * (ft(smp.r, smp.omega) - smp.value).norm_sqr()))
        .collect();
    terms.extend(samples.failures.iter().map(|f| (f.r, f.weight * weight(f.r) * ft(f.r, f.omega).norm_sqr())));
    let c = (2.0 * PI).powi(-3);
    let i1 = c * terms.iter().filter(|(r, _)| *r <= split).map(|(_, v)| v).sum::<f64>();
    let above: Vec<f64> = terms.iter().filter(|(r, _)| *r > split).map(|(_, v)| *v).collect();
    let i2 = if above.is_empty() { None } else { Some(c * above.iter().sum::<f64>()) };
    let i3 = c * tail_integral(q_tilde, samples.t_max, s, opts)?;
    let error_h_minus_s = (i1 + i2.unwrap_or(0.0) + i3).sqrt();
    let pad = (opts.torus_max_points / grid.n()).max(1);
    let mut diff = q_tilde.sub(q_hat)?;
    diff.kind = FieldKind::Interior;
    let torus_surrogate = padded_sobolev_norm(&diff, -s, pad)?;
    Ok(ErrorBreakdown { error_h_minus_s, i1, i2, i3, torus_surrogate })
}

/// `int_{T}^{pi/h} int |F f(r w)|^2 (1+r^2)^{-s} r^2 dw dr` with `r = T/u`.
fn tail_integral(f: &ScalarField, t: f64, s: f64, opts: &ErrorOptions) -> Result<f64> {
    let r_max = f.grid.nyquist();
    if t >= r_max {
        return Ok(0.0);
    }
    let design = SphereDesign::new(SphereDesignKind::ProductGauss { polar: opts.tail_polar })?;
    let nodes: Vec<(f64, f64)> = if t > 0.0 {
        let (u, wu) = gauss_legendre(opts.tail_radial, t / r_max, 1.0)?;
        u.iter().zip(&wu).map(|(u, w)| (t / u, w * t / (u * u))).collect()
    } else {
        let (r, w) = gauss_legendre(opts.tail_radial, 0.0, r_max)?;
        r.into_iter().zip(w).collect()
    };
    let work: Vec<(f64, f64, [f64; 3], f64)> = nodes
        .iter()
        .flat_map(|(r, wr)| design.directions.iter().zip(&design.weights).map(move |(d, wd)| (*r, *wr, *d, *wd)))
        .collect();
    Ok(work
        .par_iter()
        .map(|(r, wr, d, wd)| {
            let v = fourier_transform_at(f, [r * d[0], r * d[1], r * d[2]]);
            wr * wd * r * r * (1.0 + r * r).powf(-s) * v.norm_sqr()
        })
        .sum())
}

/// `||f||_{H^{-s}(R^3)}` of a zero-extended field by polar quadrature.
pub fn polar_h_minus_s_norm(f: &ScalarField, s: f64, opts: &ErrorOptions) -> Result<f64> {
    Ok(((2.0 * PI).powi(-3) * tail_integral(f, 0.0, s, opts)?).sqrt())
}

/// DtN matrices for `q1`, `q2` and the potential-free reference at one `k`.
#[derive(Clone, Debug)]
pub struct DtnData {
    pub lambda1: DtnMatrix,
    pub lambda2: DtnMatrix,
    pub reference: DtnMatrix,
}

impl DtnData {
    pub fn compute(q1: &Potential, q2: &Potential, k: f64, degree_cap: usize) -> Result<Self> {
        q1.field.check_grid(&q2.field)?;
        let basis = BoundaryBasis::new(q1.grid(), degree_cap)?;
        let one = |q: &Potential| -> Result<DtnMatrix> {
            let solver = HelmholtzSolver::new(q, k)?;
            dtn_matrix_with(&solver, &basis, q)
        };
        let lambda1 = one(q1)?;
        let lambda2 = if q1.field == q2.field { lambda1.clone() } else { one(q2)? };
        let reference = if q1.is_zero() {
            lambda1.clone()
        } else if q2.is_zero() {
            lambda2.clone()
        } else {
            one(&sample_potential(&PotentialSpec::Zero, &q1.grid(), q1.s)?)?
        };
        Ok(Self { lambda1, lambda2, reference })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub k: f64,
    pub r_param: f64,
    pub p: f64,
    pub s: f64,
    pub noise: Option<NoiseSpec>,
    pub mode: ProbeMode,
    pub radial_count: usize,
    pub design: SphereDesignKind,
    pub degree_cap: usize,
    /// Cutoff on the exact-data path; `k + 8` when absent.
    pub t_cap: Option<f64>,
    pub noise_scale: NoiseScale,
    pub c_emp: f64,
    pub error: ErrorOptions,
}

impl ReconstructOptions {
    pub fn new(k: f64, r_param: f64) -> Self {
        Self {
            k,
            r_param,
            p: 0.25,
            s: 2.0,
            noise: None,
            mode: ProbeMode::Boundary,
            radial_count: 16,
            design: SphereDesignKind::Lebedev26,
            degree_cap: 6,
            t_cap: None,
            noise_scale: NoiseScale::DistSquared,
            c_emp: crate::alessandrini::DEFAULT_C_EMP,
            error: ErrorOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub i1: f64,
    pub i2: Option<f64>,
    pub i3: f64,
    pub torus_surrogate: f64,
    /// `||q~||_{H^{-s}}` by the same polar quadrature, for relative errors.
    pub q_tilde_h_minus_s: f64,
    /// Largest discarded imaginary part of the synthesis.
    pub imag_remainder: f64,
    /// Noise-free DtN distance of the two potentials (boundary mode).
    pub cauchy_dist_q1_q2: Option<f64>,
    /// `C k^4 dist` with the calibrated constant.
    pub lipschitz_term: Option<f64>,
    /// `C (k + log(1/dist))^{-(2s-3)}` with the calibrated constant.
    pub log_term: Option<f64>,
    pub sample_count: usize,
    pub failed_samples: usize,
    pub truncation_warnings: usize,
    pub max_psi_h_s_norm: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub q_hat: ScalarField,
    pub k: f64,
    pub policy: CutoffPolicy,
    pub dist_proxy: f64,
    pub error_h_minus_s: f64,
    /// `2s - n`.
    pub m: f64,
    pub diagnostics: Diagnostics,
    pub samples: FourierSampleSet,
}

/// Cutoff choice, sampling, synthesis and error evaluation for one `(k, noise)` cell.
pub fn reconstruct(
    q1: &Potential,
    q2: &Potential,
    opts: &ReconstructOptions,
    dtn: Option<&DtnData>,
) -> Result<ReconstructionResult> {
    let start = Instant::now();
    if !(opts.s > 1.5) {
        return Err(LabError::config(format!("Sobolev exponent must exceed 3/2, got {}", opts.s)));
    }
    q1.field.check_grid(&q2.field)?;
    let grid = q1.grid();
    let epsilon = opts.noise.map(|n| n.epsilon).unwrap_or(0.0);
    let owned;
    let (boundary, dist_proxy, cauchy_dist_q1_q2) = match opts.mode {
        ProbeMode::Boundary => {
            let data = match dtn {
                Some(d) => d,
                None => {
                    owned = DtnData::compute(q1, q2, opts.k, opts.degree_cap)?;
                    &owned
                }
            };
            let noisy = match &opts.noise {
                Some(spec) if spec.epsilon > 0.0 => add_noise_with(&data.lambda2, spec),
                _ => data.lambda2.clone(),
            };
            let dist = dist_between(&noisy, &data.lambda2, &data.reference)?;
            let clean = dist_between(&data.lambda1, &data.lambda2, &data.reference)?;
            (Some(BoundaryData { lambda1: data.lambda1.clone(), lambda2: noisy }), dist, Some(clean))
        }
        ProbeMode::Oracle => (None, epsilon, None),
    };
    let policy = if dist_proxy > 0.0 {
        choose_cutoff_scaled(opts.k, dist_proxy, opts.r_param, opts.p, opts.noise_scale)?
    } else {
        exact_cutoff(opts.k, opts.r_param, opts.p, opts.t_cap)
    };
    let setup = ProbeSetup::new(q1, q2, boundary.as_ref())?.with_c_emp(opts.c_emp);
    let plan = SamplingPlan {
        k: opts.k,
        r_param: opts.r_param,
        t_max: policy.t,
        radial_count: opts.radial_count,
        design: SphereDesign::new(opts.design)?,
        mode: opts.mode,
        noise: epsilon,
    };
    let samples = acquire_samples(&setup, &plan)?;
    let synthesis = lowpass_invert_detailed(&samples, &grid)?;
    let mut q_tilde = q1.field.sub(&q2.field)?;
    q_tilde.kind = FieldKind::Interior;
    let err = error_h_minus_s(&q_tilde, &samples, &synthesis.field, opts.s, &opts.error)?;
    let m = 2.0 * opts.s - 3.0;
    let (lipschitz_term, log_term) = if dist_proxy > 0.0 {
        (
            Some(opts.c_emp * opts.k.powi(4) * dist_proxy),
            Some(opts.c_emp * (opts.k + (1.0 / dist_proxy).ln()).powf(-m)),
        )
    } else {
        (None, None)
    };
    let diagnostics = Diagnostics {
        i1: err.i1,
        i2: err.i2,
        i3: err.i3,
        torus_surrogate: err.torus_surrogate,
        q_tilde_h_minus_s: polar_h_minus_s_norm(&q_tilde, opts.s, &opts.error)?,
        imag_remainder: synthesis.imag_max,
        cauchy_dist_q1_q2,
        lipschitz_term,
        log_term,
        sample_count: samples.samples.len(),
        failed_samples: samples.failures.len(),
        truncation_warnings: samples.truncation_warnings(),
        max_psi_h_s_norm: samples.samples.iter().map(|s| s.psi_h_s_norm).fold(0.0, f64::max),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(ReconstructionResult {
        q_hat: synthesis.field,
        k: opts.k,
        policy,
        dist_proxy,
        error_h_minus_s: err.error_h_minus_s,
        m,
        diagnostics,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn choose_a_branches() {
        assert_eq!(choose_a(0.0, 1.0, 5.0), 5.0);
        assert_eq!(choose_a(10.0, 1.0, 5.0), 10.0);
        assert_eq!(choose_a(6.0, 1.0, 5.0), 5.0);
    }

    #[test]
    fn cutoff_examples() {
        let c = choose_cutoff(1.0, 1e-6, 5.0, 1.0).unwrap();
        assert_eq!(c.regime, Regime::CaseI);
        assert_relative_eq!(c.t, 12.0 * 10f64.ln(), max_relative = 1e-12);
        let c = choose_cutoff(20.0, 1e-2, 5.0, 1.0).unwrap();
        assert_eq!(c.regime, Regime::CaseII);
        assert_eq!(c.t, 25.0);
        assert!(matches!(choose_cutoff(1.0, 0.5, 5.0, 1.0), Err(LabError::Config(_))));
        assert!(matches!(choose_cutoff(1.0, 0.0, 5.0, 1.0), Err(LabError::Config(_))));
        let e = exact_cutoff(2.0, 5.0, 0.25, None);
        assert_eq!((e.regime, e.t), (Regime::Exact, 10.0));
    }
}
