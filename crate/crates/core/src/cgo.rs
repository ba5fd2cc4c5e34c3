//! Complex geometrical optics solutions `u = exp(i zeta.x) (1 + psi)` of
//! `(Delta + k^2 + q) u = 0`, built by a fixed point on a shifted Fourier lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft::Fft3;
use crate::grid::{lattice_sobolev_norm, FieldKind, Grid, Potential, ScalarField, ZERO};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn scale(c: f64, a: Vec3) -> Vec3 {
    [c * a[0], c * a[1], c * a[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// `zeta = eta + i xi` with `zeta.zeta = k^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaVector {
    pub eta: Vec3,
    pub xi: Vec3,
    pub k: f64,
}

impl ZetaVector {
    /// Checks `|eta|^2 = k^2 + |xi|^2` and `eta.xi = 0` to 1e-10.
    pub fn new(eta: Vec3, xi: Vec3, k: f64) -> Result<Self> {
        let z = Self { eta, xi, k };
        let lhs = dot(eta, eta);
        let rhs = k * k + dot(xi, xi);
        if (lhs - rhs).abs() > 1e-10 * rhs.max(1.0) || dot(eta, xi).abs() > 1e-10 * norm(eta) * norm(xi) + 1e-300 {
            return Err(LabError::config(format!(
                "zeta violates zeta.zeta = k^2: |eta|^2 = {lhs}, k^2 + |xi|^2 = {rhs}, eta.xi = {}",
                dot(eta, xi)
            )));
        }
        Ok(z)
    }

    pub fn components(&self) -> [Complex64; 3] {
        [0, 1, 2].map(|a| Complex64::new(self.eta[a], self.xi[a]))
    }

    /// `zeta.zeta` (bilinear, no conjugation).
    pub fn self_dot(&self) -> Complex64 {
        self.components().iter().map(|c| c * c).sum()
    }

    pub fn xi_norm(&self) -> f64 {
        norm(self.xi)
    }
}

/// The two probing vectors with `zeta1 + zeta2 = -r omega`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaPair {
    pub zeta1: ZetaVector,
    pub zeta2: ZetaVector,
    pub omega: Vec3,
    /// `(omega_perp, omega_perp_tilde)`, completing `omega` to a right-handed frame.
    pub frame: (Vec3, Vec3),
    pub r: f64,
    pub a: f64,
}

/// Unit vector orthogonal to `omega`: `seed` (or the coordinate / face-diagonal
/// direction most orthogonal to `omega`) with its `omega` component removed.
fn perpendicular(omega: Vec3, seed: Option<Vec3>) -> Vec3 {
    let project = |v: Vec3| {
        let c = dot(v, omega);
        if c.abs() <= 1e-12 {
            v
        } else {
            let w = add(v, scale(-c, omega));
            scale(1.0 / norm(w), w)
        }
    };
    if let Some(s) = seed {
        let ns = norm(s);
        if ns > 0.0 && (dot(s, omega) / ns).abs() < 1.0 - 1e-6 {
            return project(scale(1.0 / ns, s));
        }
    }
    let s2 = 0.5f64.sqrt();
    let mut candidates: Vec<Vec3> = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for sg in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[i] = s2;
            v[j] = sg * s2;
            candidates.push(v);
        }
    }
    let mut best = candidates[0];
    for c in candidates {
        if dot(c, omega).abs() < dot(best, omega).abs() - 1e-15 {
            best = c;
        }
    }
    project(best)
}

/// `xi1 = a w_perp`, `eta1 = -(r/2) omega + sqrt(k^2 + a^2 - r^2/4) w_perp_tilde`,
/// `xi2 = -xi1`, `eta2 = -r omega - eta1`.
pub fn make_zeta_pair(k: f64, r: f64, omega: Vec3, a: f64, frame_seed: Option<Vec3>) -> Result<ZetaPair> {
    if (norm(omega) - 1.0).abs() > 1e-12 {
        return Err(LabError::config(format!("omega must be a unit vector, |omega| = {}", norm(omega))));
    }
    if !(a > 0.0) || !(r >= 0.0) || !(k > 0.0) {
        return Err(LabError::config(format!("need k > 0, r >= 0, a > 0; got k={k}, r={r}, a={a}")));
    }
    let lhs = k * k + a * a;
    let rhs = r * r / 4.0;
    if lhs <= rhs {
        return Err(LabError::InvalidFrequencyRange { lhs, rhs });
    }
    let perp = perpendicular(omega, frame_seed);
    let perp_t = cross(omega, perp);
    let xi1 = scale(a, perp);
    let eta1 = add(scale(-r / 2.0, omega), scale((lhs - rhs).sqrt(), perp_t));
    let eta2 = add(scale(-r, omega), scale(-1.0, eta1));
    let xi2 = scale(-1.0, xi1);
    Ok(ZetaPair {
        zeta1: ZetaVector { eta: eta1, xi: xi1, k },
        zeta2: ZetaVector { eta: eta2, xi: xi2, k },
        omega,
        frame: (perp, perp_t),
        r,
        a,
    })
}

/// Diagonal Fourier multiplier for `Delta + 2 i zeta.grad` on the lattice
/// `(pi/L) Z^3 + (pi/(2L)) e_j`, `j` the axis where `|xi|` is largest.
pub struct FaddeevOperator {
    grid: Grid,
    shift: Vec3,
    /// `-(|mu|^2 + 2 zeta.mu)` per FFT bin.
    symbol: Vec<Complex64>,
    /// `exp(i shift.x)` per node.
    phase: Vec<Complex64>,
    fft: Fft3,
}

/// Relative guard on the smallest symbol magnitude.
pub const SYMBOL_GUARD: f64 = 1e-12;

impl FaddeevOperator {
    pub fn new(grid: Grid, zeta: &ZetaVector) -> Result<Self> {
        let axis = (0..3)
            .max_by(|a, b| zeta.xi[*a].abs().total_cmp(&zeta.xi[*b].abs()))
            .unwrap_or(0);
        let mut shift = [0.0; 3];
        shift[axis] = PI / (2.0 * grid.extent());
        let freqs = grid.frequencies();
        let z = zeta.components();
        let mut min_symbol = f64::INFINITY;
        let mut symbol = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let (i, j, k) = grid.unravel(idx);
            let mu = [freqs[i] + shift[0], freqs[j] + shift[1], freqs[k] + shift[2]];
            let s = -(Complex64::new(dot(mu, mu), 0.0) + 2.0 * (z[0] * mu[0] + z[1] * mu[1] + z[2] * mu[2]));
            min_symbol = min_symbol.min(s.norm());
            symbol.push(s);
        }
        let guard = SYMBOL_GUARD * (1.0 + zeta.xi_norm());
        if min_symbol < guard {
            return Err(LabError::DegenerateSymbol { min_symbol, guard });
        }
        let xs = grid.coords();
        let phase = (0..grid.len())
            .map(|idx| {
                let (i, j, k) = grid.unravel(idx);
                Complex64::from_polar(1.0, shift[0] * xs[i] + shift[1] * xs[j] + shift[2] * xs[k])
            })
            .collect();
        Ok(Self { grid, shift, symbol, phase, fft: Fft3::new(grid.n()) })
    }

    pub fn shift(&self) -> Vec3 {
        self.shift
    }

    pub fn min_symbol(&self) -> f64 {
        self.symbol.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min)
    }

    fn multiply(&self, values: &[Complex64], invert: bool) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().zip(&self.phase).map(|(v, p)| v * p.conj()).collect();
        self.fft.forward(&mut data);
        for (d, s) in data.iter_mut().zip(&self.symbol) {
            if invert {
                *d /= s;
            } else {
                *d *= s;
            }
        }
        self.fft.inverse(&mut data);
        data.iter_mut().zip(&self.phase).for_each(|(d, p)| *d *= p);
        data
    }

    /// Solves `(Delta + 2 i zeta.grad) psi = rhs` spectrally.
    pub fn invert(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        self.multiply(rhs, true)
    }

    /// Applies `Delta + 2 i zeta.grad` spectrally.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.multiply(f, false)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
}

/// One-shot inverse of the conjugated Laplacian on a periodic right-hand side.
pub fn faddeev_invert(zeta: &ZetaVector, rhs: &ScalarField) -> Result<ScalarField> {
    let op = FaddeevOperator::new(rhs.grid, zeta)?;
    Ok(ScalarField { grid: rhs.grid, values: op.invert(&rhs.values), kind: FieldKind::Periodic })
}

/// Spectral `Delta + 2 i zeta.grad` on the same shifted lattice.
pub fn faddeev_apply(zeta: &ZetaVector, f: &ScalarField) -> Result<ScalarField> {
    let op = FaddeevOperator::new(f.grid, zeta)?;
    Ok(ScalarField { grid: f.grid, values: op.apply(&f.values), kind: FieldKind::Periodic })
}

#[derive(Clone, Debug)]
pub struct CgoSolution {
    pub zeta: ZetaVector,
    pub psi: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub psi_h_s_norm: f64,
    pub s: f64,
    pub lattice_shift: Vec3,
}

/// Ratio above which an iteration counts as a non-contracting strike.
pub const CONTRACTION_RATIO: f64 = 0.9;
/// Consecutive strikes that abort the fixed point.
pub const MAX_STRIKES: usize = 5;

/// Fixed point `psi = -G_zeta(q (1 + psi))` until `||psi_{n+1} - psi_n||_{L2} <= tol`.
pub fn build_cgo(q: &Potential, zeta: &ZetaVector, tol: f64, max_iter: usize) -> Result<CgoSolution> {
    let grid = q.grid();
    if !(tol >= 1e-12) {
        return Err(LabError::config(format!("CGO tolerance must be >= 1e-12, got {tol}")));
    }
    let op = FaddeevOperator::new(grid, zeta)?;
    let h3 = grid.spacing().powi(3);
    let qv = q.real_values();
    let mut psi = vec![ZERO; grid.len()];
    if q.is_zero() {
        return Ok(CgoSolution {
            zeta: *zeta,
            psi: ScalarField { grid, values: psi, kind: FieldKind::Periodic },
            residual: 0.0,
            iterations: 1,
            psi_h_s_norm: 0.0,
            s: q.s,
            lattice_shift: op.shift(),
        });
    }
    let mut prev = f64::INFINITY;
    let mut strikes = 0;
    let mut contracted = false;
    for it in 1..=max_iter.max(1) {
        let rhs: Vec<Complex64> = qv.iter().zip(&psi).map(|(q, p)| -(1.0 + p) * q).collect();
        let next = op.invert(&rhs);
        let residual = (next.iter().zip(&psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * h3).sqrt();
        psi = next;
        if residual <= tol {
            let field = ScalarField { grid, values: psi, kind: FieldKind::Periodic };
            let psi_h_s_norm = lattice_sobolev_norm(&field, q.s, op.shift());
            return Ok(CgoSolution {
                zeta: *zeta,
                psi: field,
                residual,
                iterations: it,
                psi_h_s_norm,
                s: q.s,
                lattice_shift: op.shift(),
            });
        }
        let ratio = residual / prev;
        if contracted && ratio > 1.0 {
            // a contracting map cannot start expanding again
            return Err(LabError::NoContraction { iterations: it, residual });
        }
        if ratio <= CONTRACTION_RATIO {
            contracted = true;
            strikes = 0;
        } else if it > 1 {
            strikes += 1;
            if strikes >= MAX_STRIKES {
                return Err(LabError::NoContraction { iterations: it, residual });
            }
        }
        prev = residual;
    }
    Err(LabError::NoContraction { iterations: max_iter, residual: prev })
}

/// Grid samples of `exp(i zeta.x) (1 + psi)`.
pub fn cgo_field(sol: &CgoSolution) -> ScalarField {
    let grid = sol.psi.grid;
    let xs = grid.coords();
    let z = sol.zeta.components();
    let values = sol
        .psi
        .values
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let (i, j, k) = grid.unravel(idx);
            let arg = z[0] * xs[i] + z[1] * xs[j] + z[2] * xs[k];
            (Complex64::i() * arg).exp() * (1.0 + p)
        })
        .collect();
    ScalarField { grid, values, kind: FieldKind::Periodic }
}

/// Search settings for [`estimate_cstar`].
#[derive(Clone, Copy, Debug)]
pub struct CstarOptions {
    pub a_min: f64,
    pub a_max: f64,
    pub bisection_steps: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for CstarOptions {
    fn default() -> Self {
        Self { a_min: 0.05, a_max: 256.0, bisection_steps: 12, max_iter: 200, tol: 1e-10 }
    }
}

/// Empirical contraction constant: the smallest `a` (by bisection, probing
/// along `zeta = make_zeta_pair(k, 0, e3, a).zeta1`) at which the fixed point
/// contracts, divided by `||q||_{H^s}`. Returns 0 for `q = 0` and `+inf` if
/// nothing up to `a_max` contracts.
pub fn estimate_cstar(q: &Potential, k: f64, opts: CstarOptions) -> Result<f64> {
    if q.is_zero() || q.h_s_norm == 0.0 {
        return Ok(0.0);
    }
    let contracts = |a: f64| -> Result<bool> {
        let zeta = make_zeta_pair(k, 0.0, [0.0, 0.0, 1.0], a, None)?.zeta1;
        match build_cgo(q, &zeta, opts.tol, opts.max_iter) {
            Ok(_) => Ok(true),
            Err(LabError::NoContraction { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if contracts(opts.a_min)? {
        return Ok(opts.a_min / q.h_s_norm);
    }
    if !contracts(opts.a_max)? {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (opts.a_min, opts.a_max);
    for _ in 0..opts.bisection_steps {
        let mid = (lo * hi).sqrt();
        if contracts(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi / q.h_s_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_potential, PotentialSpec};
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_pairs() {
        let p = make_zeta_pair(1.0, 0.0, [1.0, 0.0, 0.0], 2.0, Some([0.0, 1.0, 0.0])).unwrap();
        assert_eq!(p.frame, ([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]));
        assert_relative_eq!(p.zeta1.xi[1], 2.0);
        assert_relative_eq!(p.zeta1.eta[2], 5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.zeta2.xi[1], -2.0);
        assert_relative_eq!(p.zeta2.eta[2], -(5f64.sqrt()), epsilon = 1e-15);

        let p = make_zeta_pair(2.0, 2.0, [1.0, 0.0, 0.0], 3.0, None).unwrap();
        assert_relative_eq!(p.zeta1.eta[0], -1.0);
        assert_relative_eq!(p.zeta1.eta[2], 12f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(dot(p.zeta1.eta, p.zeta1.eta), 13.0, epsilon = 1e-12);

        assert!(matches!(
            make_zeta_pair(1.0, 10.0, [1.0, 0.0, 0.0], 1.0, None),
            Err(LabError::InvalidFrequencyRange { .. })
        ));
        assert!(matches!(make_zeta_pair(1.0, 0.0, [1.0, 1.0, 0.0], 1.0, None), Err(LabError::Config(_))));
    }

    #[test]
    fn faddeev_single_mode_is_diagonal() {
        let g = Grid::new(1.0, 16).unwrap();
        let p = make_zeta_pair(2.0, 1.0, [0.0, 0.0, 1.0], 3.0, None).unwrap();
        let op = FaddeevOperator::new(g, &p.zeta1).unwrap();
        let sh = op.shift();
        let mu = [PI * 2.0 + sh[0], -PI + sh[1], PI * 3.0 + sh[2]];
        let f = ScalarField::from_fn(g, FieldKind::Periodic, |x| Complex64::from_polar(1.0, dot(mu, x)));
        let out = faddeev_invert(&p.zeta1, &f).unwrap();
        let z = p.zeta1.components();
        let sym = -(Complex64::new(dot(mu, mu), 0.0) + 2.0 * (z[0] * mu[0] + z[1] * mu[1] + z[2] * mu[2]));
        for (o, i) in out.values.iter().zip(&f.values) {
            assert!((o - i / sym).norm() < 1e-12);
        }
        let zero = faddeev_invert(&p.zeta1, &ScalarField::zeros(g, FieldKind::Periodic)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn zero_potential_trivial_solution() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        let z = make_zeta_pair(1.0, 0.0, [0.0, 0.0, 1.0], 3.0, None).unwrap().zeta1;
        let sol = build_cgo(&q, &z, 1e-10, 10).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.psi.max_abs(), 0.0);
    }

    #[test]
    fn strong_potential_fails_to_contract() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 400.0), &g, 2.0).unwrap();
        let z = make_zeta_pair(1.0, 0.0, [0.0, 0.0, 1.0], 1.0, None).unwrap().zeta1;
        assert!(matches!(build_cgo(&q, &z, 1e-10, 100), Err(LabError::NoContraction { .. })));
    }

    #[test]
    fn cgo_field_at_origin_without_correction() {
        let g = Grid::new(1.0, 8).unwrap();
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        let z = make_zeta_pair(1.0, 0.0, [0.0, 0.0, 1.0], 0.1, None).unwrap().zeta1;
        let sol = build_cgo(&q, &z, 1e-10, 10).unwrap();
        let u = cgo_field(&sol);
        // exp(i zeta.x) has modulus exp(-xi.x)
        for (idx, v) in u.values.iter().enumerate() {
            let (i, j, k) = g.unravel(idx);
            assert_relative_eq!(v.norm(), (-dot(z.xi, g.point(i, j, k))).exp(), max_relative = 1e-12);
        }
    }
}
