use std::f64::consts::PI;

use approx::assert_relative_eq;
use cgolab::alessandrini::{FourierSample, FourierSampleSet, ProbeMode};
use cgolab::forward::{NoiseModel, NoiseSpec};
use cgolab::grid::{fourier_transform_at, sample_potential, FieldKind, Grid, Potential, PotentialSpec};
use cgolab::quadrature::{gauss_legendre, SphereDesign, SphereDesignKind};
use cgolab::reconstruction::{
    choose_a, error_h_minus_s, lowpass_invert, reconstruct, ErrorOptions, ReconstructOptions, Regime,
};
use num_complex::Complex64;

/// A sample set on the usual polar grid with values supplied by `f`.
fn synthetic_set(t: f64, radial: usize, f: impl Fn([f64; 3]) -> Complex64) -> FourierSampleSet {
    let design = SphereDesign::new(SphereDesignKind::Lebedev26).unwrap();
    let (radii, radial_weights) = gauss_legendre(radial, 0.0, t).unwrap();
    let mut samples = Vec::new();
    for (r, wr) in radii.iter().zip(&radial_weights) {
        for (om, wo) in design.directions.iter().zip(&design.weights) {
            samples.push(FourierSample {
                r: *r,
                omega: *om,
                a: choose_a(*r, 1.0, 3.0),
                value: f([r * om[0], r * om[1], r * om[2]]),
                mode: ProbeMode::Oracle,
                error_estimate: None,
                weight: wr * wo * r * r,
                basis_truncation: false,
                psi_h_s_norm: 0.0,
            });
        }
    }
    FourierSampleSet {
        samples,
        t_max: t,
        k: 1.0,
        r_param: 3.0,
        noise: 0.0,
        mode: ProbeMode::Oracle,
        radii,
        radial_weights,
        design,
        failures: Vec::new(),
    }
}

fn bump(g: &Grid, amp: f64) -> Potential {
    sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, amp), g, 2.0).unwrap()
}

#[test]
fn choose_a_switches_after_the_split() {
    assert_eq!(choose_a(4.0, 1.0, 3.0), 3.0);
    assert_eq!(choose_a(4.0 + 1e-12, 1.0, 3.0), 4.0 + 1e-12);
}

#[test]
fn zero_samples_give_zero_field() {
    let g = Grid::new(1.0, 12).unwrap();
    let set = synthetic_set(6.0, 4, |_| Complex64::new(0.0, 0.0));
    assert_eq!(lowpass_invert(&set, &g).unwrap().max_abs(), 0.0);
}

#[test]
fn single_mode_synthesizes_a_plane_wave() {
    let g = Grid::new(1.0, 12).unwrap();
    let mut set = synthetic_set(6.0, 4, |_| Complex64::new(0.0, 0.0));
    let v = Complex64::new(2.0, -1.0);
    set.samples[37].value = v;
    let s = set.samples[37].clone();
    let xi = [s.r * s.omega[0], s.r * s.omega[1], s.r * s.omega[2]];
    let q_hat = lowpass_invert(&set, &g).unwrap();
    for (idx, val) in q_hat.values.iter().enumerate() {
        let (i, j, k) = g.unravel(idx);
        let x = [g.coord(i), g.coord(j), g.coord(k)];
        let phase = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2];
        let expected = (v * Complex64::from_polar(1.0, phase)).re * s.weight / (2.0 * PI).powi(3);
        assert!((val.re - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        assert_eq!(val.im, 0.0);
    }
}

#[test]
fn synthesis_is_linear_in_the_samples() {
    let g = Grid::new(1.0, 12).unwrap();
    let q = bump(&g, 1.0);
    let f = |xi: [f64; 3]| fourier_transform_at(&q.field, xi);
    let base = lowpass_invert(&synthetic_set(8.0, 6, f), &g).unwrap();
    let scaled = lowpass_invert(&synthetic_set(8.0, 6, |xi| f(xi) * 3.5), &g).unwrap();
    for (a, b) in base.values.iter().zip(&scaled.values) {
        assert!((b - a * 3.5).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}

#[test]
fn polar_and_torus_norms_agree_for_zero_reconstruction() {
    let g = Grid::new(1.0, 24).unwrap();
    let mut q = bump(&g, 1.0).field;
    q.kind = FieldKind::Interior;
    let set = synthetic_set(6.0, 12, |_| Complex64::new(0.0, 0.0));
    let zero = cgolab::grid::ScalarField::zeros(g, FieldKind::Interior);
    let e = error_h_minus_s(&q, &set, &zero, 2.0, &ErrorOptions::default()).unwrap();
    assert_relative_eq!(e.error_h_minus_s, e.torus_surrogate, max_relative = 0.10);
    assert!(e.i1 > 0.0 && e.i3 > 0.0);
}

fn oracle_options(k: f64, noise: f64) -> ReconstructOptions {
    ReconstructOptions {
        mode: ProbeMode::Oracle,
        radial_count: 8,
        noise: (noise > 0.0).then_some(NoiseSpec { epsilon: noise, seed: 1, model: NoiseModel::Dense }),
        ..ReconstructOptions::new(k, 3.0)
    }
}

#[test]
fn identical_potentials_reconstruct_to_zero() {
    let g = Grid::new(0.55, 16).unwrap();
    let q = bump(&g, 5.0);
    let res = reconstruct(&q, &q, &oracle_options(1.0, 0.0), None).unwrap();
    assert!(res.error_h_minus_s <= 1e-12);
    assert_eq!(res.q_hat.max_abs(), 0.0);
    assert_eq!(res.policy.regime, Regime::Exact);
    assert_eq!(res.policy.t, 9.0);
    assert_eq!(res.m, 1.0);
}

#[test]
fn moderate_noise_uses_the_linear_cutoff() {
    let g = Grid::new(0.55, 16).unwrap();
    let q1 = bump(&g, 5.0);
    let q0 = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
    let res = reconstruct(&q1, &q0, &oracle_options(1.0, 1e-3), None).unwrap();
    assert_eq!(res.policy.regime, Regime::CaseII);
    assert_eq!(res.policy.t, 4.0);
    assert_eq!(res.diagnostics.i2, None);
    assert!(res.error_h_minus_s < res.diagnostics.q_tilde_h_minus_s);
    assert_eq!(res.diagnostics.sample_count, 8 * 26);
}

#[test]
fn oracle_error_falls_with_bandwidth() {
    let g = Grid::new(0.55, 16).unwrap();
    let q1 = bump(&g, 5.0);
    let q0 = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
    let err = |t: f64| {
        let opts = ReconstructOptions { t_cap: Some(t), ..oracle_options(1.0, 0.0) };
        reconstruct(&q1, &q0, &opts, None).unwrap().error_h_minus_s
    };
    let (e4, e8) = (err(4.0), err(8.0));
    assert!(e8 < 0.5 * e4, "{e4:e} {e8:e}");
}
