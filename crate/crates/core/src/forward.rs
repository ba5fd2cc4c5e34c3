//! Dirichlet solver for `(Delta + k^2 + q) u = 0`, Cauchy data, DtN matrices,
//! measurement noise and the DtN distance proxy.
//!
//! Unknowns are the `(N-2)^3` interior nodes; the outer node layer carries the
//! Dirichlet data. The 7-point system `(Delta_h + k^2 + Q) u = b` is solved by
//! GMRES on `(I + Q M^{-1}) y = b`, `u = M^{-1} y`, where `M = Delta_h + k^2`
//! with homogeneous Dirichlet conditions is inverted exactly by a 3D DST-I.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::fft::Dst3;
use crate::grid::{
    boundary_sobolev_norm, boundary_trace, face_node, normal_derivative, BoundaryField, FieldKind, Grid,
    Potential, ScalarField, StencilOrder, FACES, ZERO,
};
use crate::krylov::{gmres, GmresOptions};

/// Relative distance of `k^2` to the Dirichlet spectrum of `-Delta_h` below
/// which a potential-free solve is refused.
pub const RESONANCE_MARGIN: f64 = 1e-6;

/// Reusable solver for one `(q, k)`.
pub struct HelmholtzSolver {
    grid: Grid,
    k: f64,
    m: usize,
    q_interior: Vec<f64>,
    has_potential: bool,
    symbol: Vec<f64>,
    dst: Dst3,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

impl HelmholtzSolver {
    pub fn new(q: &Potential, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(LabError::config(format!("wave number must be positive, got {k}")));
        }
        let grid = q.grid();
        let n = grid.n();
        let m = n - 2;
        let h = grid.spacing();
        let lam: Vec<f64> = (1..=m)
            .map(|j| -(4.0 / (h * h)) * (j as f64 * std::f64::consts::PI / (2.0 * (m + 1) as f64)).sin().powi(2))
            .collect();
        let mut symbol = Vec::with_capacity(m * m * m);
        let mut nearest = f64::INFINITY;
        for c in 0..m {
            for b in 0..m {
                for a in 0..m {
                    let s = lam[a] + lam[b] + lam[c] + k * k;
                    nearest = nearest.min(s.abs());
                    symbol.push(s);
                }
            }
        }
        let mut q_interior = Vec::with_capacity(m * m * m);
        for c in 1..n - 1 {
            for b in 1..n - 1 {
                for a in 1..n - 1 {
                    q_interior.push(q.field.at(a, b, c).re);
                }
            }
        }
        let has_potential = q_interior.iter().any(|v| *v != 0.0);
        if !has_potential && nearest < RESONANCE_MARGIN * k * k {
            return Err(LabError::ResonantFrequency {
                k,
                detail: format!("|k^2 - lambda| = {nearest:e} for the nearest discrete Dirichlet eigenvalue"),
            });
        }
        Ok(Self { grid, k, m, q_interior, has_potential, symbol, dst: Dst3::new(m) })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Distance from `k^2` to the nearest eigenvalue of the potential-free operator.
    pub fn resonance_gap(&self) -> f64 {
        self.symbol.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min)
    }

    fn apply_minv(&self, v: &mut [Complex64]) {
        self.dst.transform(v);
        let sc = self.dst.inverse_scale();
        v.iter_mut().zip(&self.symbol).for_each(|(x, s)| *x *= sc / s);
        self.dst.transform(v);
    }

    /// Solves with Dirichlet data `f`; returns the full-grid field.
    pub fn solve(&self, f: &BoundaryField, tol: f64) -> Result<(ScalarField, SolveStats)> {
        if f.grid != self.grid {
            return Err(LabError::config("boundary data lives on a different grid"));
        }
        let grid = self.grid;
        let n = grid.n();
        let m = self.m;
        let h2 = grid.spacing().powi(2);
        let mut u = ScalarField::zeros(grid, FieldKind::Interior);
        f.write_into(&mut u);
        // boundary neighbours moved to the right-hand side
        let mut b = vec![ZERO; m * m * m];
        for c in 1..n - 1 {
            for bb in 1..n - 1 {
                for a in 1..n - 1 {
                    let mut acc = ZERO;
                    for (da, db, dc) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                        for sg in [-1isize, 1] {
                            let (x, y, z) = (
                                (a as isize + sg * da) as usize,
                                (bb as isize + sg * db) as usize,
                                (c as isize + sg * dc) as usize,
                            );
                            let on_boundary = [x, y, z].iter().any(|t| *t == 0 || *t == n - 1);
                            if on_boundary {
                                acc += u.at(x, y, z);
                            }
                        }
                    }
                    b[(a - 1) + m * ((bb - 1) + m * (c - 1))] = -acc / h2;
                }
            }
        }
        let mut y = vec![ZERO; m * m * m];
        let opts = GmresOptions { tol, restart: 40, max_restarts: 8 };
        let outcome = if self.has_potential {
            let mut tmp = vec![ZERO; m * m * m];
            gmres(
                |v, out| {
                    tmp.copy_from_slice(v);
                    self.apply_minv(&mut tmp);
                    for ((o, vi), (t, q)) in out.iter_mut().zip(v).zip(tmp.iter().zip(&self.q_interior)) {
                        *o = vi + q * t;
                    }
                },
                &b,
                &mut y,
                opts,
            )
        } else {
            y.copy_from_slice(&b);
            crate::krylov::GmresOutcome { iterations: 0, rel_residual: 0.0, converged: true }
        };
        if !outcome.converged {
            return Err(LabError::ResonantFrequency {
                k: self.k,
                detail: format!(
                    "GMRES stagnated at relative residual {:e} after {} iterations",
                    outcome.rel_residual, outcome.iterations
                ),
            });
        }
        self.apply_minv(&mut y);
        for c in 1..n - 1 {
            for bb in 1..n - 1 {
                for a in 1..n - 1 {
                    u.values[grid.index(a, bb, c)] = y[(a - 1) + m * ((bb - 1) + m * (c - 1))];
                }
            }
        }
        let rel_residual = helmholtz_residual(&u, &self.q_full(), self.k) / norm(&b).max(f64::MIN_POSITIVE);
        Ok((u, SolveStats { iterations: outcome.iterations, rel_residual }))
    }

    fn q_full(&self) -> Vec<f64> {
        let n = self.grid.n();
        let m = self.m;
        let mut out = vec![0.0; self.grid.len()];
        for c in 1..n - 1 {
            for b in 1..n - 1 {
                for a in 1..n - 1 {
                    out[self.grid.index(a, b, c)] = self.q_interior[(a - 1) + m * ((b - 1) + m * (c - 1))];
                }
            }
        }
        out
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of `(Delta_h + k^2 + q) u` over interior nodes (unscaled).
pub fn helmholtz_residual(u: &ScalarField, q: &[f64], k: f64) -> f64 {
    let grid = u.grid;
    let n = grid.n();
    let h2 = grid.spacing().powi(2);
    let mut acc = 0.0;
    for c in 1..n - 1 {
        for b in 1..n - 1 {
            for a in 1..n - 1 {
                let centre = u.at(a, b, c);
                let lap = (u.at(a + 1, b, c)
                    + u.at(a - 1, b, c)
                    + u.at(a, b + 1, c)
                    + u.at(a, b - 1, c)
                    + u.at(a, b, c + 1)
                    + u.at(a, b, c - 1)
                    - centre * 6.0)
                    / h2;
                acc += (lap + centre * (k * k + q[grid.index(a, b, c)])).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Interior field with Dirichlet data `f`; relative residual of the linear system `<= tol`.
pub fn solve_dirichlet(q: &Potential, k: f64, f: &BoundaryField, tol: f64) -> Result<ScalarField> {
    let solver = HelmholtzSolver::new(q, k)?;
    solver.solve(f, tol).map(|(u, _)| u)
}

/// Outward flux consistent with the 7-point scheme on the boundary layer:
/// `g = (u_b - u_1)/h - (h/2)(Delta_T u_b + k^2 u_b)`, zero on edges. It makes
/// the discrete Green identity, and hence DtN reciprocity, exact.
pub fn consistent_flux(u: &ScalarField, k: f64) -> BoundaryField {
    let grid = u.grid;
    let n = grid.n();
    let h = grid.spacing();
    let mut out = BoundaryField::zeros(grid);
    for (f, face) in out.faces.iter_mut().enumerate() {
        let at = |a: usize, b: usize, d: usize| u.values[face_node(&grid, f, a, b, d)];
        for b in 1..n - 1 {
            for a in 1..n - 1 {
                let ub = at(a, b, 0);
                let lap_t = (at(a + 1, b, 0) + at(a - 1, b, 0) + at(a, b + 1, 0) + at(a, b - 1, 0) - ub * 4.0) / (h * h);
                face[a + n * b] = (ub - at(a, b, 1)) / h - (lap_t + ub * (k * k)) * (h / 2.0);
            }
        }
    }
    out
}

/// Dirichlet and Neumann traces of a field.
#[derive(Clone, Debug)]
pub struct CauchyPair {
    pub f: BoundaryField,
    pub g: BoundaryField,
    pub k: f64,
    pub norm_cache: f64,
}

impl CauchyPair {
    pub fn new(f: BoundaryField, g: BoundaryField, k: f64) -> Result<Self> {
        if f.grid != g.grid {
            return Err(LabError::config("Cauchy traces on different grids"));
        }
        let norm_cache = (boundary_sobolev_norm(&f, 0.5).powi(2) + boundary_sobolev_norm(&g, -0.5).powi(2)).sqrt();
        Ok(Self { f, g, k, norm_cache })
    }
}

/// Traces of `u` with the 4th-order one-sided normal derivative.
pub fn cauchy_data(u: &ScalarField, k: f64) -> CauchyPair {
    let f = boundary_trace(u);
    let g = normal_derivative(u, StencilOrder::Fourth);
    CauchyPair::new(f, g, k).expect("traces of one field share a grid")
}

/// One basis element: `sin(m1 pi a/(N-1)) sin(m2 pi b/(N-1))` on one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMode {
    pub face: usize,
    pub m1: usize,
    pub m2: usize,
}

/// Per-face sine modes up to a degree cap, orthonormal in `h^2 sum` on each
/// face and vanishing on edges.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryBasis {
    pub grid: Grid,
    pub degree_cap: usize,
    pub modes: Vec<BasisMode>,
    /// `1 + (pi/l)^2 (m1^2 + m2^2)`, `l` the face side length.
    pub weights: Vec<f64>,
    profiles: Vec<Vec<f64>>,
}

impl BoundaryBasis {
    pub fn new(grid: Grid, degree_cap: usize) -> Result<Self> {
        let n = grid.n();
        if degree_cap == 0 || degree_cap > n - 2 {
            return Err(LabError::config(format!("degree cap must lie in 1..={}, got {degree_cap}", n - 2)));
        }
        let h = grid.spacing();
        let side = (n - 1) as f64 * h;
        let profiles = (1..=degree_cap)
            .map(|m| {
                let raw: Vec<f64> =
                    (0..n).map(|a| (m as f64 * std::f64::consts::PI * a as f64 / (n - 1) as f64).sin()).collect();
                let nrm = (raw.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
                raw.iter().map(|v| v / nrm).collect()
            })
            .collect();
        let mut modes = Vec::new();
        let mut weights = Vec::new();
        for face in 0..FACES.len() {
            for m1 in 1..=degree_cap {
                for m2 in 1..=degree_cap {
                    modes.push(BasisMode { face, m1, m2 });
                    let w = std::f64::consts::PI / side;
                    weights.push(1.0 + w * w * (m1 * m1 + m2 * m2) as f64);
                }
            }
        }
        Ok(Self { grid, degree_cap, modes, weights, profiles })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `N x N` face samples of basis element `i`.
    pub fn face_values(&self, i: usize) -> Vec<f64> {
        let n = self.grid.n();
        let BasisMode { m1, m2, .. } = self.modes[i];
        let (p1, p2) = (&self.profiles[m1 - 1], &self.profiles[m2 - 1]);
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push(p1[a] * p2[b]);
            }
        }
        out
    }

    pub fn element(&self, i: usize) -> BoundaryField {
        let mut bf = BoundaryField::zeros(self.grid);
        bf.faces[self.modes[i].face] = self.face_values(i).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        bf
    }

    /// Bilinear coordinates `c_i = h^2 sum bf b_i`.
    pub fn coords(&self, bf: &BoundaryField) -> DVector<Complex64> {
        let h2 = self.grid.spacing().powi(2);
        DVector::from_iterator(
            self.len(),
            (0..self.len()).map(|i| {
                let face = &bf.faces[self.modes[i].face];
                face.iter().zip(self.face_values(i)).map(|(v, b)| v * b).sum::<Complex64>() * h2
            }),
        )
    }

    /// Fraction of `h^2 sum |bf|^2` captured by the projection onto the basis.
    pub fn captured_energy(&self, bf: &BoundaryField) -> f64 {
        let h2 = self.grid.spacing().powi(2);
        let total: f64 = bf.faces.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() * h2;
        if total == 0.0 {
            return 1.0;
        }
        let c = self.coords(bf);
        c.iter().map(|v| v.norm_sqr()).sum::<f64>() / total
    }

    pub fn weight_scaling(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.weights.iter().map(|w| w.powf(-0.25)))
    }
}

/// Finite section of the DtN map: `entries[(i, j)] = h^2 sum g_j b_i`.
#[derive(Clone, Debug)]
pub struct DtnMatrix {
    pub basis: BoundaryBasis,
    pub entries: DMatrix<Complex64>,
    pub k: f64,
    pub degree_cap: usize,
    pub q_id: String,
}

impl DtnMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `W^{-1/4} A W^{-1/4}`: the `H^{1/2} -> H^{-1/2}` realization in basis coordinates.
    pub fn weighted(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let s = self.basis.weight_scaling();
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (s[i] * s[j]))
    }

    pub fn weighted_norm(&self) -> f64 {
        spectral_norm(&self.weighted(&self.entries))
    }

    /// Largest `|A_ij - A_ji| / max |A|` (reciprocity defect under the real pairing).
    pub fn asymmetry(&self) -> f64 {
        let a = &self.entries;
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..i {
                worst = worst.max((a[(i, j)] - a[(j, i)]).norm());
            }
        }
        worst / scale
    }

    fn check_compatible(&self, other: &DtnMatrix) -> Result<()> {
        if self.basis != other.basis || self.k != other.k {
            return Err(LabError::config("DtN matrices use different bases or wave numbers"));
        }
        Ok(())
    }
}

pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Short hex fingerprint of a potential's sampled values.
pub fn potential_id(q: &Potential) -> String {
    let mut hasher = Sha256::new();
    hasher.update(q.grid().extent().to_le_bytes());
    hasher.update((q.grid().n() as u64).to_le_bytes());
    for v in &q.field.values {
        hasher.update(v.re.to_le_bytes());
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Solver tolerance used for DtN columns.
pub const DTN_SOLVE_TOL: f64 = 1e-11;

/// One Dirichlet solve per basis element, columns in parallel.
pub fn dtn_matrix(q: &Potential, k: f64, degree_cap: usize) -> Result<DtnMatrix> {
    let basis = BoundaryBasis::new(q.grid(), degree_cap)?;
    let solver = HelmholtzSolver::new(q, k)?;
    dtn_matrix_with(&solver, &basis, q)
}

pub fn dtn_matrix_with(solver: &HelmholtzSolver, basis: &BoundaryBasis, q: &Potential) -> Result<DtnMatrix> {
    let h2 = basis.grid.spacing().powi(2);
    let dim = basis.len();
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let (u, _) = solver.solve(&basis.element(j), DTN_SOLVE_TOL)?;
            let g = consistent_flux(&u, solver.k());
            Ok((0..dim)
                .map(|i| {
                    let face = &g.faces[basis.modes[i].face];
                    face.iter().zip(basis.face_values(i)).map(|(v, b)| v * b).sum::<Complex64>() * h2
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(dim, dim, |i, j| columns[j][i]);
    Ok(DtnMatrix { basis: basis.clone(), entries, k: solver.k(), degree_cap: basis.degree_cap, q_id: potential_id(q) })
}

/// How measurement noise is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Dense complex gaussian matrix with prescribed weighted operator norm.
    #[default]
    Dense,
    /// Independent relative perturbation `eps |A_ij| g_ij` per entry.
    PerEntry,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub seed: u64,
    #[serde(default)]
    pub model: NoiseModel,
}

fn gaussian_matrix(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::from_element(n, n, ZERO);
    for j in 0..n {
        for i in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    out
}

/// Dense noise: `||W^{-1/4} (out - m) W^{-1/4}|| = epsilon ||m||_w`.
pub fn add_noise(m: &DtnMatrix, epsilon: f64, seed: u64) -> DtnMatrix {
    add_noise_with(m, &NoiseSpec { epsilon, seed, model: NoiseModel::Dense })
}

pub fn add_noise_with(m: &DtnMatrix, spec: &NoiseSpec) -> DtnMatrix {
    if spec.epsilon == 0.0 {
        return m.clone();
    }
    let n = m.dim();
    let g = gaussian_matrix(n, spec.seed);
    let perturbation = match spec.model {
        NoiseModel::Dense => {
            let target = spec.epsilon * m.weighted_norm();
            let gn = spectral_norm(&g);
            let s = m.basis.weight_scaling();
            DMatrix::from_fn(n, n, |i, j| g[(i, j)] * (target / gn) / (s[i] * s[j]))
        }
        NoiseModel::PerEntry => DMatrix::from_fn(n, n, |i, j| g[(i, j)] * (spec.epsilon * m.entries[(i, j)].norm())),
    };
    DtnMatrix { entries: &m.entries + perturbation, ..m.clone() }
}

/// `||Lambda_1 - Lambda_2||_w / ||Lambda_0||_w` with `Lambda_0` the potential-free
/// map on the same basis and wave number.
pub fn dist_between(m1: &DtnMatrix, m2: &DtnMatrix, reference: &DtnMatrix) -> Result<f64> {
    m1.check_compatible(m2)?;
    m1.check_compatible(reference)?;
    let diff = &m1.entries - &m2.entries;
    Ok(spectral_norm(&m1.weighted(&diff)) / reference.weighted_norm())
}

/// DtN-difference proxy for the distance of the two Cauchy data sets.
pub fn cauchy_dist(q1: &Potential, q2: &Potential, k: f64, degree_cap: usize, noise: Option<NoiseSpec>) -> Result<f64> {
    q1.field.check_grid(&q2.field)?;
    let m1 = dtn_matrix(q1, k, degree_cap)?;
    let m2 = if q1.field == q2.field { m1.clone() } else { dtn_matrix(q2, k, degree_cap)? };
    let reference = if q1.is_zero() {
        m1.clone()
    } else if q2.is_zero() {
        m2.clone()
    } else {
        let zero = crate::grid::sample_potential(&crate::grid::PotentialSpec::Zero, &q1.grid(), q1.s)?;
        dtn_matrix(&zero, k, degree_cap)?
    };
    let m2 = match noise {
        Some(spec) => add_noise_with(&m2, &spec),
        None => m2,
    };
    dist_between(&m1, &m2, &reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_potential, PotentialSpec};

    fn plane_wave(g: Grid, k: f64, d: [f64; 3]) -> ScalarField {
        ScalarField::from_fn(g, FieldKind::Interior, |x| {
            Complex64::from_polar(1.0, k * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2]))
        })
    }

    #[test]
    fn zero_data_zero_solution() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        let u = solve_dirichlet(&q, 1.0, &BoundaryField::zeros(g), 1e-10).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn plane_wave_manufactured_solution() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        let d = [0.6, 0.0, 0.8];
        let exact = plane_wave(g, 2.0, d);
        let u = solve_dirichlet(&q, 2.0, &boundary_trace(&exact), 1e-10).unwrap();
        let err = u.sub(&exact).unwrap().max_abs();
        assert!(err < 2e-2, "err {err}");
    }

    #[test]
    fn potential_solve_has_small_residual() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.25, 3.0), &g, 2.0).unwrap();
        let solver = HelmholtzSolver::new(&q, 1.5).unwrap();
        let f = boundary_trace(&plane_wave(g, 1.5, [1.0, 0.0, 0.0]));
        let (_, stats) = solver.solve(&f, 1e-10).unwrap();
        assert!(stats.rel_residual < 1e-8, "{stats:?}");
    }

    #[test]
    fn exact_resonance_is_reported() {
        // k^2 equal to the lowest discrete Dirichlet eigenvalue of -Delta_h
        let g = Grid::new(1.0, 8).unwrap();
        let h = g.spacing();
        let lam = 3.0 * (4.0 / (h * h)) * (std::f64::consts::PI / 14.0).sin().powi(2);
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        assert!(matches!(HelmholtzSolver::new(&q, lam.sqrt()), Err(LabError::ResonantFrequency { .. })));
    }

    #[test]
    fn dtn_reciprocity_and_noise() {
        let g = Grid::new(1.0, 12).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.1, 0.0, 0.0], 0.2, 2.0), &g, 2.0).unwrap();
        let m = dtn_matrix(&q, 1.3, 2).unwrap();
        assert_eq!(m.dim(), 24);
        assert!(m.asymmetry() < 1e-8, "asym {}", m.asymmetry());
        let noisy = add_noise(&m, 1e-3, 7);
        let diff = DtnMatrix { entries: &noisy.entries - &m.entries, ..m.clone() };
        let rel = diff.weighted_norm() / m.weighted_norm();
        assert!((rel - 1e-3).abs() < 1e-13);
        assert_eq!(add_noise(&m, 1e-3, 7).entries, noisy.entries);
        assert_eq!(add_noise(&m, 0.0, 7).entries, m.entries);
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = Grid::new(1.0, 10).unwrap();
        let b = BoundaryBasis::new(g, 3).unwrap();
        for i in [0, 4, 13] {
            let c = b.coords(&b.element(i));
            for (j, v) in c.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_data_of_linear_field() {
        let g = Grid::new(1.0, 12).unwrap();
        let u = ScalarField::from_fn(g, FieldKind::Interior, |x| Complex64::new(x[0], 0.0));
        let c = cauchy_data(&u, 1.0);
        assert!((c.g.faces[1][5].re - 1.0).abs() < 1e-12);
        assert!((c.g.faces[0][5].re + 1.0).abs() < 1e-12);
        let z = cauchy_data(&ScalarField::zeros(g, FieldKind::Interior), 1.0);
        assert_eq!(z.norm_cache, 0.0);
    }
}
