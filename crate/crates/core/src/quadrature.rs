//! Radial and spherical quadrature rules for polar Fourier integrals.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Gauss-Legendre nodes and weights on `[lo, hi]`, nodes ascending.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let deg = NonZeroUsize::new(n).ok_or_else(|| LabError::config("quadrature needs at least one node"))?;
    let rule = GaussLegendre::new(deg);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(pairs.iter().map(|(x, w)| (mid + half * x, half * w)).unzip())
}

/// Which family of sphere rules to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SphereDesignKind {
    /// The six coordinate directions.
    Octahedral,
    /// 26-point Lebedev rule, exact for polynomials of degree 7.
    Lebedev26,
    /// Gauss-Legendre in `cos(theta)` times `2 * polar` uniform azimuths.
    ProductGauss { polar: usize },
}

/// Unit directions with weights summing to `4 pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDesign {
    pub kind: SphereDesignKind,
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereDesign {
    pub fn new(kind: SphereDesignKind) -> Result<Self> {
        match kind {
            SphereDesignKind::Octahedral => Ok(octahedral()),
            SphereDesignKind::Lebedev26 => Ok(lebedev26()),
            SphereDesignKind::ProductGauss { polar } => product_gauss(polar),
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.directions.iter().zip(&self.weights).map(|(d, w)| w * f(*d)).sum()
    }
}

fn axes() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for sg in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[a] = sg;
            out.push(v);
        }
    }
    out
}

fn octahedral() -> SphereDesign {
    let directions = axes();
    let weights = vec![4.0 * PI / 6.0; 6];
    SphereDesign { kind: SphereDesignKind::Octahedral, directions, weights }
}

fn lebedev26() -> SphereDesign {
    let mut directions = axes();
    let mut weights = vec![4.0 * PI / 21.0; 6];
    let s2 = 0.5f64.sqrt();
    for a in 0..3 {
        for b in a + 1..3 {
            for sa in [1.0, -1.0] {
                for sb in [1.0, -1.0] {
                    let mut v = [0.0; 3];
                    v[a] = sa * s2;
                    v[b] = sb * s2;
                    directions.push(v);
                    weights.push(4.0 * PI * 4.0 / 105.0);
                }
            }
        }
    }
    let s3 = (1.0f64 / 3.0).sqrt();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                directions.push([sx * s3, sy * s3, sz * s3]);
                weights.push(4.0 * PI * 9.0 / 280.0);
            }
        }
    }
    SphereDesign { kind: SphereDesignKind::Lebedev26, directions, weights }
}

fn product_gauss(polar: usize) -> Result<SphereDesign> {
    if polar < 2 {
        return Err(LabError::config("product-Gauss sphere rule needs at least 2 polar nodes"));
    }
    let (ct, wt) = gauss_legendre(polar, -1.0, 1.0)?;
    let nphi = 2 * polar;
    let mut directions = Vec::with_capacity(polar * nphi);
    let mut weights = Vec::with_capacity(polar * nphi);
    for (c, w) in ct.iter().zip(&wt) {
        let st = (1.0 - c * c).sqrt();
        for j in 0..nphi {
            let ph = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
            directions.push([st * ph.cos(), st * ph.sin(), *c]);
            weights.push(w * 2.0 * PI / nphi as f64);
        }
    }
    Ok(SphereDesign { kind: SphereDesignKind::ProductGauss { polar }, directions, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5, 0.0, 2.0).unwrap();
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert_relative_eq!(int, 2f64.powi(10) / 10.0, max_relative = 1e-13);
    }

    fn monomial_average(d: &SphereDesign, e: [i32; 3]) -> f64 {
        d.integrate(|v| v[0].powi(e[0]) * v[1].powi(e[1]) * v[2].powi(e[2])) / (4.0 * PI)
    }

    #[test]
    fn designs_have_unit_directions_and_total_weight() {
        for kind in [
            SphereDesignKind::Octahedral,
            SphereDesignKind::Lebedev26,
            SphereDesignKind::ProductGauss { polar: 5 },
        ] {
            let d = SphereDesign::new(kind).unwrap();
            for v in &d.directions {
                assert_relative_eq!(v.iter().map(|c| c * c).sum::<f64>(), 1.0, epsilon = 1e-14);
            }
            assert_relative_eq!(d.weights.iter().sum::<f64>(), 4.0 * PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn lebedev_exact_to_degree_seven() {
        let d = SphereDesign::new(SphereDesignKind::Lebedev26).unwrap();
        assert_eq!(d.len(), 26);
        // <x^2> = 1/3, <x^4> = 1/5, <x^2 y^2> = 1/15, <x^6> = 1/7, <x^2 y^2 z^2> = 1/105
        assert_relative_eq!(monomial_average(&d, [2, 0, 0]), 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(monomial_average(&d, [4, 0, 0]), 0.2, epsilon = 1e-14);
        assert_relative_eq!(monomial_average(&d, [2, 2, 0]), 1.0 / 15.0, epsilon = 1e-14);
        assert_relative_eq!(monomial_average(&d, [6, 0, 0]), 1.0 / 7.0, epsilon = 1e-14);
        assert_relative_eq!(monomial_average(&d, [2, 2, 2]), 1.0 / 105.0, epsilon = 1e-14);
        assert!(monomial_average(&d, [3, 1, 0]).abs() < 1e-15);
    }

    #[test]
    fn product_gauss_exactness() {
        let d = SphereDesign::new(SphereDesignKind::ProductGauss { polar: 6 }).unwrap();
        assert_eq!(d.len(), 72);
        assert_relative_eq!(monomial_average(&d, [0, 0, 8]), 1.0 / 9.0, epsilon = 1e-13);
        assert_relative_eq!(monomial_average(&d, [4, 4, 0]), 1.0 / 105.0, epsilon = 1e-13);
    }
}
