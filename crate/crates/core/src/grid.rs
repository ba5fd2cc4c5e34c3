//! Grids, gridded fields, potentials, Sobolev norms and boundary traces.
//!
//! The computational cube is `[-L, L]^3` with `N` cell-centred nodes per axis,
//! `x_j = -L + (j + 1/2) h`, `h = 2L/N`. Spectral operations treat the cube as
//! a torus of period `2L`. The physical domain used for boundary value
//! problems is the cube spanned by the outermost node layers,
//! `[-(L - h/2), L - h/2]^3`; its six faces carry `N x N` samples each, with
//! edge and corner nodes shared between adjacent faces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft::{fft2_forward, Fft3};

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Uniform cell-centred grid on `[-extent, extent]^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    extent: f64,
    n: usize,
}

impl Grid {
    /// Builds a grid; `n` must be even and at least 8.
    pub fn new(extent: f64, n: usize) -> Result<Self> {
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(LabError::config(format!("grid extent must be positive, got {extent}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(LabError::config(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        Ok(Self { extent, n })
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Torus period per axis.
    pub fn period(&self) -> f64 {
        2.0 * self.extent
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-width of the boundary-value domain (faces through the outer nodes).
    pub fn domain_half_width(&self) -> f64 {
        self.extent - 0.5 * self.spacing()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        (idx % self.n, (idx / self.n) % self.n, idx / (self.n * self.n))
    }

    /// Signed torus frequency `(pi/L) * m` of FFT bin `i`, `m` in `[-N/2, N/2)`.
    pub fn frequency(&self, i: usize) -> f64 {
        let n = self.n as isize;
        let m = if (i as isize) < n / 2 { i as isize } else { i as isize - n };
        PI / self.extent * m as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.frequency(i)).collect()
    }

    /// Frequency magnitude reachable on the grid (Nyquist along one axis).
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }
}

/// Whether a field is a compactly supported interior quantity or a torus function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Interior,
    Periodic,
}

/// Complex samples on every grid node, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub kind: FieldKind,
}

impl ScalarField {
    pub fn zeros(grid: Grid, kind: FieldKind) -> Self {
        Self { grid, values: vec![ZERO; grid.len()], kind }
    }

    pub fn from_fn(grid: Grid, kind: FieldKind, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let xs = grid.coords();
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    values.push(f([xs[i], xs[j], xs[k]]));
                }
            }
        }
        Self { grid, values, kind }
    }

    pub fn from_values(grid: Grid, kind: FieldKind, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::config(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, kind })
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(LabError::config("fields live on different grids"));
        }
        Ok(())
    }

    /// Grid L2 norm `(h^3 sum |v|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h * h).sqrt()
    }

    /// Sesquilinear `h^3 sum f conj(g)`.
    pub fn inner(&self, other: &ScalarField) -> Complex64 {
        let h = self.grid.spacing();
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * (h * h * h)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl SupportBox {
    pub fn empty() -> Self {
        Self { lo: [0.0; 3], hi: [0.0; 3] }
    }

    pub fn union(&self, other: &SupportBox) -> SupportBox {
        let mut out = *self;
        for a in 0..3 {
            out.lo[a] = self.lo[a].min(other.lo[a]);
            out.hi[a] = self.hi[a].max(other.hi[a]);
        }
        out
    }

    pub fn contains_open(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] > self.lo[a] && p[a] < self.hi[a])
    }
}

/// One smooth, compactly supported gaussian bump
/// `amplitude * exp(-|x-c|^2 / width^2) * cutoff(|x-c| / (2.5 width))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
}

/// Support radius of a bump in units of its width.
pub const BUMP_SUPPORT_WIDTHS: f64 = 2.5;

impl GaussianBump {
    pub fn support_radius(&self) -> f64 {
        BUMP_SUPPORT_WIDTHS * self.width
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let d2: f64 = (0..3).map(|a| (x[a] - self.center[a]).powi(2)).sum();
        let t = d2.sqrt() / self.support_radius();
        if t >= 1.0 {
            return 0.0;
        }
        self.amplitude * (-d2 / (self.width * self.width)).exp() * smooth_cutoff(t)
    }

    fn support_box(&self) -> SupportBox {
        let r = self.support_radius();
        SupportBox {
            lo: [self.center[0] - r, self.center[1] - r, self.center[2] - r],
            hi: [self.center[0] + r, self.center[1] + r, self.center[2] + r],
        }
    }
}

/// `C^inf` step: 1 on `[0, 1/2]`, 0 on `[1, inf)`.
pub fn smooth_cutoff(t: f64) -> f64 {
    fn f(s: f64) -> f64 {
        if s > 0.0 {
            (-1.0 / s).exp()
        } else {
            0.0
        }
    }
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let s = (t - 0.5) / 0.5;
        f(1.0 - s) / (f(1.0 - s) + f(s))
    }
}

/// Analytic description of a test potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    GaussianBump(GaussianBump),
    BumpSum { bumps: Vec<GaussianBump> },
}

impl PotentialSpec {
    pub fn gaussian(center: [f64; 3], width: f64, amplitude: f64) -> Self {
        PotentialSpec::GaussianBump(GaussianBump { center, width, amplitude })
    }

    fn bumps(&self) -> Vec<&GaussianBump> {
        match self {
            PotentialSpec::Zero => vec![],
            PotentialSpec::GaussianBump(b) => vec![b],
            PotentialSpec::BumpSum { bumps } => bumps.iter().collect(),
        }
    }

    /// Same descriptor with every amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let scale = |b: &GaussianBump| GaussianBump { amplitude: b.amplitude * c, ..b.clone() };
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::GaussianBump(b) => PotentialSpec::GaussianBump(scale(b)),
            PotentialSpec::BumpSum { bumps } => PotentialSpec::BumpSum { bumps: bumps.iter().map(scale).collect() },
        }
    }
}

/// Real, compactly supported potential on a grid.
#[derive(Clone, Debug)]
pub struct Potential {
    pub field: ScalarField,
    pub s: f64,
    pub h_s_norm: f64,
    pub support_box: SupportBox,
}

impl Potential {
    pub fn grid(&self) -> Grid {
        self.field.grid
    }

    pub fn is_zero(&self) -> bool {
        self.field.values.iter().all(|v| *v == ZERO)
    }

    /// Real values.
    pub fn real_values(&self) -> Vec<f64> {
        self.field.values.iter().map(|v| v.re).collect()
    }

    /// Zero extension of `self - other`.
    pub fn difference(&self, other: &Potential) -> Result<Potential> {
        let field = self.field.sub(&other.field)?;
        let h_s_norm = sobolev_norm(&field, self.s)?;
        Ok(Potential {
            field,
            s: self.s,
            h_s_norm,
            support_box: self.support_box.union(&other.support_box),
        })
    }
}

/// Samples an analytic potential descriptor onto `grid`, caching its `H^s` norm.
pub fn sample_potential(spec: &PotentialSpec, grid: &Grid, s: f64) -> Result<Potential> {
    let limit = grid.domain_half_width();
    let mut support = SupportBox::empty();
    let bumps = spec.bumps();
    for (idx, b) in bumps.iter().enumerate() {
        if !(b.width > 0.0) {
            return Err(LabError::config(format!("bump width must be positive, got {}", b.width)));
        }
        let bx = b.support_box();
        let inside = (0..3).all(|a| bx.lo[a] >= -limit && bx.hi[a] <= limit);
        if !inside {
            return Err(LabError::config(format!(
                "bump support radius {} around {:?} leaves the domain interior (half-width {limit})",
                b.support_radius(),
                b.center
            )));
        }
        support = if idx == 0 { bx } else { support.union(&bx) };
    }
    let field = ScalarField::from_fn(*grid, FieldKind::Interior, |x| {
        Complex64::new(bumps.iter().map(|b| b.eval(x)).sum(), 0.0)
    });
    let h_s_norm = sobolev_norm(&field, s)?;
    Ok(Potential { field, s, h_s_norm, support_box: support })
}

/// Torus Fourier coefficients `q_hat(mu) = h^3 sum q(x) exp(-i mu.x)` over the
/// lattice `(pi/L) Z^3 + shift`.
pub(crate) fn torus_coefficients(field: &ScalarField, shift: [f64; 3]) -> Vec<Complex64> {
    let grid = field.grid;
    let h = grid.spacing();
    let mut data = field.values.clone();
    let needs_shift = shift.iter().any(|s| *s != 0.0);
    if needs_shift {
        let xs = grid.coords();
        for (idx, v) in data.iter_mut().enumerate() {
            let (i, j, k) = grid.unravel(idx);
            let ph = shift[0] * xs[i] + shift[1] * xs[j] + shift[2] * xs[k];
            *v *= Complex64::from_polar(1.0, -ph);
        }
    }
    // Nodes start at -L + h/2 rather than 0: fold that offset into a phase.
    let fft = Fft3::new(grid.n());
    fft.forward(&mut data);
    let x0 = grid.coord(0);
    let freqs = grid.frequencies();
    for (idx, v) in data.iter_mut().enumerate() {
        let (i, j, k) = grid.unravel(idx);
        let ph = -(freqs[i] + freqs[j] + freqs[k]) * x0;
        *v *= Complex64::from_polar(h * h * h, ph);
    }
    data
}

/// Continuous Fourier transform `int f(x) exp(-i xi.x) dx` of a zero-extended
/// field by the midpoint rule.
pub fn fourier_transform_at(field: &ScalarField, xi: [f64; 3]) -> Complex64 {
    let grid = field.grid;
    let n = grid.n();
    let xs = grid.coords();
    let e: Vec<Vec<Complex64>> =
        (0..3).map(|a| xs.iter().map(|x| Complex64::from_polar(1.0, -xi[a] * x)).collect()).collect();
    let mut total = ZERO;
    for k in 0..n {
        let mut plane = ZERO;
        for j in 0..n {
            let row = &field.values[grid.index(0, j, k)..grid.index(0, j, k) + n];
            let line: Complex64 = row.iter().zip(&e[0]).map(|(v, ex)| v * ex).sum();
            plane += line * e[1][j];
        }
        total += plane * e[2][k];
    }
    total * grid.spacing().powi(3)
}

/// Weighted spectral sum `((2L)^{-3} sum_mu (1+|mu|^2)^s |q_hat(mu)|^2)^{1/2}`.
pub(crate) fn lattice_sobolev_norm(field: &ScalarField, s: f64, shift: [f64; 3]) -> f64 {
    let grid = field.grid;
    let coeffs = torus_coefficients(field, shift);
    let freqs = grid.frequencies();
    let mut acc = 0.0;
    for (idx, c) in coeffs.iter().enumerate() {
        let (i, j, k) = grid.unravel(idx);
        let mu2 = (freqs[i] + shift[0]).powi(2) + (freqs[j] + shift[1]).powi(2) + (freqs[k] + shift[2]).powi(2);
        acc += (1.0 + mu2).powf(s) * c.norm_sqr();
    }
    (acc / grid.period().powi(3)).sqrt()
}

/// Spectral Sobolev norm on the grid torus.
///
/// A single torus mode `exp(i mu.x)` has norm `(1+|mu|^2)^{s/2} (2L)^{3/2}`;
/// `s = 0` reproduces the grid L2 norm. Negative `s` assumes a zero-extended
/// interior field.
pub fn sobolev_norm(field: &ScalarField, s: f64) -> Result<f64> {
    if s < 0.0 && field.kind != FieldKind::Interior {
        return Err(LabError::config("negative-order norms need a zero-extended interior field"));
    }
    Ok(lattice_sobolev_norm(field, s, [0.0; 3]))
}

/// `sobolev_norm` of the field zero-padded into a cube `pad` times larger.
///
/// For compactly supported fields this approaches the `H^s(R^3)` norm as the
/// padded period grows.
pub fn padded_sobolev_norm(field: &ScalarField, s: f64, pad: usize) -> Result<f64> {
    if field.kind != FieldKind::Interior {
        return Err(LabError::config("padding needs a zero-extended interior field"));
    }
    let pad = pad.max(1);
    let g = field.grid;
    let n = g.n();
    let big = Grid::new(g.extent() * pad as f64, n * pad)?;
    let mut padded = ScalarField::zeros(big, FieldKind::Interior);
    let off = (n * pad - n) / 2;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                padded.values[big.index(i + off, j + off, k + off)] = field.at(i, j, k);
            }
        }
    }
    Ok(lattice_sobolev_norm(&padded, s, [0.0; 3]))
}

/// The six faces in fixed order: `(axis, side)` with side 0 at the low end.
pub const FACES: [(usize, usize); 6] = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)];

/// Tangential axes of a face with normal `axis`, in increasing order.
pub fn tangential_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Grid index of node `(a, b)` on face `f`, `depth` layers inward.
pub fn face_node(grid: &Grid, face: usize, a: usize, b: usize, depth: usize) -> usize {
    let (axis, side) = FACES[face];
    let n = grid.n();
    let layer = if side == 0 { depth } else { n - 1 - depth };
    let (t1, t2) = tangential_axes(axis);
    let mut ijk = [0usize; 3];
    ijk[axis] = layer;
    ijk[t1] = a;
    ijk[t2] = b;
    grid.index(ijk[0], ijk[1], ijk[2])
}

/// Values on the six cube faces, `N x N` per face, first tangential index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    pub grid: Grid,
    pub faces: Vec<Vec<Complex64>>,
}

impl BoundaryField {
    pub fn zeros(grid: Grid) -> Self {
        let m = grid.n() * grid.n();
        Self { grid, faces: vec![vec![ZERO; m]; 6] }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            faces: self.faces.iter().map(|f| f.iter().map(|v| v * c).collect()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `h^2 sum f g` over face nodes (bilinear, edges counted once per face).
    pub fn pairing(&self, other: &BoundaryField) -> Complex64 {
        let h = self.grid.spacing();
        self.faces
            .iter()
            .zip(&other.faces)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y))
            .sum::<Complex64>()
            * (h * h)
    }

    /// Writes these values into the boundary layer of `field`.
    pub fn write_into(&self, field: &mut ScalarField) {
        let n = self.grid.n();
        for (f, vals) in self.faces.iter().enumerate() {
            for b in 0..n {
                for a in 0..n {
                    field.values[face_node(&self.grid, f, a, b, 0)] = vals[a + n * b];
                }
            }
        }
    }
}

/// Restriction of a field to the outer node layer.
pub fn boundary_trace(field: &ScalarField) -> BoundaryField {
    let grid = field.grid;
    let n = grid.n();
    let faces = (0..6)
        .map(|f| {
            let mut vals = Vec::with_capacity(n * n);
            for b in 0..n {
                for a in 0..n {
                    vals.push(field.values[face_node(&grid, f, a, b, 0)]);
                }
            }
            vals
        })
        .collect();
    BoundaryField { grid, faces }
}

/// One-sided stencil order for [`normal_derivative`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// Outward normal derivative on each face by one-sided differences into the interior.
pub fn normal_derivative(field: &ScalarField, order: StencilOrder) -> BoundaryField {
    let grid = field.grid;
    let n = grid.n();
    let h = grid.spacing();
    let stencil: &[f64] = match order {
        StencilOrder::Fourth => &[-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25],
        StencilOrder::Second => &[-1.5, 2.0, -0.5],
    };
    let faces = (0..6)
        .map(|f| {
            // d/dx_axis pointing inward; outward normal derivative is its negative.
            let mut vals = Vec::with_capacity(n * n);
            for b in 0..n {
                for a in 0..n {
                    let inward: Complex64 = stencil
                        .iter()
                        .enumerate()
                        .map(|(d, c)| field.values[face_node(&grid, f, a, b, d)] * *c)
                        .sum();
                    vals.push(-inward / h);
                }
            }
            vals
        })
        .collect();
    BoundaryField { grid, faces }
}

/// Per-face Fourier surrogate for the `H^{order}` trace norm.
///
/// Each face is expanded on the torus of period `2L` in its two tangential
/// directions; mode `m` is weighted by `(1+|m|^2)^{order}` and the face sums
/// are added. A single face mode `exp(i m.y)` has norm `(1+|m|^2)^{order/2} 2L`.
pub fn boundary_sobolev_norm(bf: &BoundaryField, order: f64) -> f64 {
    let grid = bf.grid;
    let n = grid.n();
    let h = grid.spacing();
    let freqs = grid.frequencies();
    let mut acc = 0.0;
    for face in &bf.faces {
        let mut data = face.clone();
        fft2_forward(&mut data, n);
        for b in 0..n {
            for a in 0..n {
                let m2 = freqs[a] * freqs[a] + freqs[b] * freqs[b];
                acc += (1.0 + m2).powf(order) * data[a + n * b].norm_sqr() * h.powi(4);
            }
        }
    }
    (acc / grid.period().powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn build_grid_examples() {
        assert_relative_eq!(Grid::new(1.0, 16).unwrap().spacing(), 0.125);
        assert_relative_eq!(Grid::new(2.0, 48).unwrap().spacing(), 1.0 / 12.0, epsilon = 1e-15);
        assert!(matches!(Grid::new(1.0, 7), Err(LabError::Config(_))));
        assert!(matches!(Grid::new(1.0, 6), Err(LabError::Config(_))));
        let g = Grid::new(1.3, 24).unwrap();
        assert_eq!(g.spacing() * 24.0, 2.0 * 1.3);
        assert_eq!(g.period(), 2.6);
    }

    #[test]
    fn zero_potential_has_zero_norm() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
        assert_eq!(q.h_s_norm, 0.0);
        assert!(q.is_zero());
    }

    #[test]
    fn gaussian_potential_support_and_norm() {
        let g = Grid::new(1.0, 32).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.3, 1.0), &g, 2.0).unwrap();
        assert!(q.h_s_norm > 0.0 && q.h_s_norm.is_finite());
        assert_relative_eq!(q.h_s_norm, sobolev_norm(&q.field, 2.0).unwrap(), max_relative = 1e-10);
        for (idx, v) in q.field.values.iter().enumerate() {
            assert_eq!(v.im, 0.0);
            let (i, j, k) = g.unravel(idx);
            if !q.support_box.contains_open(g.point(i, j, k)) {
                assert_eq!(v.re, 0.0);
            }
        }
    }

    #[test]
    fn bump_leaving_cube_is_rejected() {
        let g = Grid::new(1.0, 16).unwrap();
        let r = sample_potential(&PotentialSpec::gaussian([1.0, 1.0, 1.0], 1.0, 1.0), &g, 2.0);
        assert!(matches!(r, Err(LabError::Config(_))));
    }

    #[test]
    fn single_mode_closed_form() {
        let g = Grid::new(1.0, 16).unwrap();
        let mu = PI / g.extent();
        let f = ScalarField::from_fn(g, FieldKind::Periodic, |x| Complex64::from_polar(1.0, mu * x[0]));
        for s in [-1.0, 0.5, 2.0] {
            let expect = (1.0 + mu * mu).powf(s / 2.0) * g.period().powf(1.5);
            assert_relative_eq!(lattice_sobolev_norm(&f, s, [0.0; 3]), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn parseval_and_homogeneity() {
        let g = Grid::new(1.0, 16).unwrap();
        let q = sample_potential(&PotentialSpec::gaussian([0.1, 0.0, -0.1], 0.25, 2.0), &g, 2.0).unwrap();
        assert_relative_eq!(sobolev_norm(&q.field, 0.0).unwrap(), q.field.l2_norm(), max_relative = 1e-10);
        let c = Complex64::new(-1.5, 2.0);
        assert_relative_eq!(
            sobolev_norm(&q.field.scaled(c), 2.0).unwrap(),
            c.norm() * q.h_s_norm,
            max_relative = 1e-12
        );
    }

    #[test]
    fn negative_order_needs_interior() {
        let g = Grid::new(1.0, 8).unwrap();
        let f = ScalarField::zeros(g, FieldKind::Periodic);
        assert!(sobolev_norm(&f, -2.0).is_err());
    }

    #[test]
    fn traces_of_constant_and_linear_fields() {
        let g = Grid::new(1.0, 16).unwrap();
        let one = ScalarField::from_fn(g, FieldKind::Interior, |_| Complex64::new(1.0, 0.0));
        let t = boundary_trace(&one);
        assert!(t.faces.iter().flatten().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(normal_derivative(&one, StencilOrder::Fourth).max_abs() < 1e-12);

        let lin = ScalarField::from_fn(g, FieldKind::Interior, |x| Complex64::new(x[0], 0.0));
        let d = normal_derivative(&lin, StencilOrder::Fourth);
        for (f, (axis, side)) in FACES.iter().enumerate() {
            let expect = if *axis == 0 { if *side == 1 { 1.0 } else { -1.0 } } else { 0.0 };
            for v in &d.faces[f] {
                assert!((v.re - expect).abs() < 1e-12, "face {f}: {v}");
            }
        }
    }

    #[test]
    fn boundary_norm_single_face_mode() {
        let g = Grid::new(1.0, 16).unwrap();
        let m = 2.0 * PI / g.period();
        let mut bf = BoundaryField::zeros(g);
        let xs = g.coords();
        let n = g.n();
        for b in 0..n {
            for a in 0..n {
                bf.faces[3][a + n * b] = Complex64::from_polar(1.0, m * xs[a]);
            }
        }
        for order in [0.5, -0.5] {
            let expect = (1.0 + m * m).powf(order / 2.0) * g.period();
            assert_relative_eq!(boundary_sobolev_norm(&bf, order), expect, max_relative = 1e-12);
        }
        assert_eq!(boundary_sobolev_norm(&BoundaryField::zeros(g), 0.5), 0.0);
    }
}
