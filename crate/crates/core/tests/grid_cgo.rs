use approx::assert_relative_eq;
use cgolab::cgo::{build_cgo, cgo_field, estimate_cstar, faddeev_apply, faddeev_invert, make_zeta_pair, CstarOptions};
use cgolab::forward::helmholtz_residual;
use cgolab::grid::{
    boundary_trace, face_node, normal_derivative, sample_potential, FieldKind, Grid, PotentialSpec, ScalarField,
    StencilOrder, FACES,
};
use cgolab::LabError;
use num_complex::Complex64;

fn plane_wave(g: Grid, k: f64, d: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(g, FieldKind::Interior, |x| Complex64::from_polar(1.0, k * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2])))
}

/// Max error of the fourth-order normal derivative of a plane wave, face interiors only.
fn plane_wave_flux_error(n: usize) -> f64 {
    let g = Grid::new(1.0, n).unwrap();
    let (k, d) = (2.0, [0.48, 0.6, 0.64]);
    let u = plane_wave(g, k, d);
    let dn = normal_derivative(&u, StencilOrder::Fourth);
    let tr = boundary_trace(&u);
    let mut worst: f64 = 0.0;
    for (f, &(axis, side)) in FACES.iter().enumerate() {
        let nu = if side == 1 { 1.0 } else { -1.0 };
        for b in 1..n - 1 {
            for a in 1..n - 1 {
                let exact = Complex64::new(0.0, k * d[axis] * nu) * tr.faces[f][a + n * b];
                worst = worst.max((dn.faces[f][a + n * b] - exact).norm());
            }
        }
    }
    worst
}

#[test]
fn plane_wave_flux_is_fourth_order() {
    let (e1, e2) = (plane_wave_flux_error(16), plane_wave_flux_error(32));
    let order = (e1 / e2).log2();
    assert!(order > 3.5, "errors {e1:e} {e2:e}, order {order}");
}

#[test]
fn face_nodes_cover_the_outer_layer() {
    let g = Grid::new(1.0, 8).unwrap();
    for (f, &(axis, side)) in FACES.iter().enumerate() {
        let (i, j, k) = g.unravel(face_node(&g, f, 3, 5, 0));
        let c = [i, j, k][axis];
        assert_eq!(c, if side == 1 { 7 } else { 0 });
        let (i, j, k) = g.unravel(face_node(&g, f, 3, 5, 2));
        assert_eq!([i, j, k][axis], if side == 1 { 5 } else { 2 });
    }
}

#[test]
fn gaussian_norm_regression_baseline() {
    let g = Grid::new(1.0, 32).unwrap();
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 1.0), &g, 2.0).unwrap();
    assert!(q.h_s_norm.is_finite() && q.h_s_norm > 0.0);
    // untruncated gaussian: (2 pi)^{-3} int (1+|xi|^2)^2 pi^3 w^6 exp(-w^2 |xi|^2 / 2) = 10.1011^2
    assert_relative_eq!(q.h_s_norm, 10.10108307718135, max_relative = 0.05);
    // recorded baseline
    assert_relative_eq!(q.h_s_norm, 10.401213921211516, max_relative = 1e-9);
}

#[test]
fn faddeev_round_trip_on_smooth_rhs() {
    let g = Grid::new(1.0, 20).unwrap();
    let zeta = make_zeta_pair(2.0, 1.0, [0.0, 0.6, 0.8], 7.0, None).unwrap().zeta1;
    let rhs = ScalarField::from_fn(g, FieldKind::Periodic, |x| {
        Complex64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * 8.0).exp(), x[0] * 0.1)
    });
    let back = faddeev_apply(&zeta, &faddeev_invert(&zeta, &rhs).unwrap()).unwrap();
    assert!(back.sub(&rhs).unwrap().l2_norm() <= 1e-10 * rhs.l2_norm());
    let zero = ScalarField::zeros(g, FieldKind::Periodic);
    assert_eq!(faddeev_invert(&zeta, &zero).unwrap().max_abs(), 0.0);
}

#[test]
fn cgo_modulus_on_the_plane_orthogonal_to_xi() {
    let g = Grid::new(1.0, 16).unwrap();
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.25, 1.0), &g, 2.0).unwrap();
    // xi along e3: nodes with x3 closest to 0 have |u| = |1 + psi| up to exp(xi3 x3)
    let zeta = make_zeta_pair(1.0, 0.0, [1.0, 0.0, 0.0], 4.0, Some([0.0, 0.0, 1.0])).unwrap().zeta1;
    let sol = build_cgo(&q, &zeta, 1e-12, 100).unwrap();
    let u = cgo_field(&sol);
    let n = g.n();
    let kk = n / 2;
    let x3 = g.coord(kk);
    for j in 0..n {
        for i in 0..n {
            let idx = g.index(i, j, kk);
            let expected = (1.0 + sol.psi.values[idx]).norm() * (-zeta.xi[2] * x3).exp();
            assert_relative_eq!(u.values[idx].norm(), expected, max_relative = 1e-12);
        }
    }
}

fn cgo_residual(n: usize) -> f64 {
    let g = Grid::new(1.0, n).unwrap();
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 2.0), &g, 2.0).unwrap();
    let k = 1.0;
    let zeta = make_zeta_pair(k, 0.0, [0.0, 0.0, 1.0], 3.0, None).unwrap().zeta1;
    let sol = build_cgo(&q, &zeta, 1e-12, 200).unwrap();
    let mut u = cgo_field(&sol);
    u.kind = FieldKind::Interior;
    let scale = u.l2_norm() / g.spacing().powf(1.5);
    helmholtz_residual(&u, &q.real_values(), k) / scale
}

#[test]
fn cgo_field_solves_the_discrete_equation_to_second_order() {
    let (r1, r2) = (cgo_residual(16), cgo_residual(32));
    assert!(r1 / r2 > 3.0, "residuals {r1:e} {r2:e}");
}

fn bump(amplitude: f64) -> cgolab::grid::Potential {
    let g = Grid::new(1.0, 16).unwrap();
    sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.25, amplitude), &g, 2.0).unwrap()
}

#[test]
fn cstar_estimates() {
    let opts = CstarOptions { bisection_steps: 10, ..CstarOptions::default() };
    let zero = sample_potential(&PotentialSpec::Zero, &Grid::new(1.0, 16).unwrap(), 2.0).unwrap();
    assert_eq!(estimate_cstar(&zero, 1.0, opts).unwrap(), 0.0);

    // thresholds are only linear in ||q|| once they are well above k
    let q = bump(480.0);
    let c1 = estimate_cstar(&q, 1.0, opts).unwrap();
    let c4 = estimate_cstar(&q, 4.0, opts).unwrap();
    assert!(c1.is_finite() && c1 > 0.0);
    assert!(c1 / c4 < 2.0 && c4 / c1 < 2.0, "{c1} {c4}");

    let q2 = bump(960.0);
    let thr1 = c1 * q.h_s_norm;
    let thr2 = estimate_cstar(&q2, 1.0, opts).unwrap() * q2.h_s_norm;
    assert_relative_eq!(thr2 / thr1, 2.0, max_relative = 0.25);
    assert!(thr1 > 4.0);
}

#[test]
fn strong_potential_at_small_a_does_not_contract() {
    let q = bump(400.0);
    let zeta = make_zeta_pair(1.0, 0.0, [0.0, 0.0, 1.0], 1.0, None).unwrap().zeta1;
    assert!(matches!(build_cgo(&q, &zeta, 1e-10, 200), Err(LabError::NoContraction { .. })));
}
