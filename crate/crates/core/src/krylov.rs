//! Restarted GMRES for complex linear systems given as a matrix-free operator.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_restarts: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 40, max_restarts: 10 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b` starting from `x`. `apply(v, out)` writes `A v` into `out`.
pub fn gmres(
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    b: &[Complex64],
    x: &mut [Complex64],
    opts: GmresOptions,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return GmresOutcome { iterations: 0, rel_residual: 0.0, converged: true };
    }
    let m = opts.restart.max(1);
    let mut total = 0;
    let mut work = vec![Complex64::new(0.0, 0.0); n];
    let mut rel = f64::INFINITY;
    for _ in 0..opts.max_restarts.max(1) {
        apply(x, &mut work);
        let r: Vec<Complex64> = b.iter().zip(&work).map(|(b, ax)| b - ax).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            return GmresOutcome { iterations: total, rel_residual: rel, converged: true };
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<Complex64> = Vec::with_capacity(m);
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut steps = 0;
        for j in 0..m {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            apply(&basis[j], &mut w);
            total += 1;
            let mut h = vec![Complex64::new(0.0, 0.0); j + 2];
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] = c;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
            let wn = norm(&w);
            h[j + 1] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i].conj() * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            // rotation zeroing h[j+1]
            let (a, bb) = (h[j], h[j + 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, Complex64::new(0.0, 0.0))
            } else if a.norm() == 0.0 {
                (0.0, bb.conj() / bb.norm())
            } else {
                let c = a.norm() / denom;
                (c, a / a.norm() * bb.conj() / denom)
            };
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = Complex64::new(0.0, 0.0);
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            cs.push(c);
            sn.push(s);
            hess.push(h);
            steps = j + 1;
            rel = g[j + 1].norm() / bnorm;
            if rel <= opts.tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular system
        let mut yv = vec![Complex64::new(0.0, 0.0); steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for (l, yl) in yv.iter().enumerate().take(steps).skip(i + 1) {
                acc -= hess[l][i] * yl;
            }
            yv[i] = acc / hess[i][i];
        }
        for (i, yi) in yv.iter().enumerate() {
            x.iter_mut().zip(&basis[i]).for_each(|(xv, bv)| *xv += yi * bv);
        }
        if rel <= opts.tol {
            apply(x, &mut work);
            let true_rel = norm(&b.iter().zip(&work).map(|(b, ax)| b - ax).collect::<Vec<_>>()) / bnorm;
            if true_rel <= opts.tol * 10.0 {
                return GmresOutcome { iterations: total, rel_residual: true_rel, converged: true };
            }
        }
    }
    GmresOutcome { iterations: total, rel_residual: rel, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let n = 30;
        let a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let base = if i == j { Complex64::new(4.0, 1.0) } else { Complex64::new(0.0, 0.0) };
                        base + Complex64::new(((i * 7 + j * 3) % 11) as f64 * 0.02, ((i + 2 * j) % 5) as f64 * -0.03)
                    })
                    .collect()
            })
            .collect();
        let xs: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.5)).collect();
        let b: Vec<Complex64> = a.iter().map(|row| row.iter().zip(&xs).map(|(r, x)| r * x).sum()).collect();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let out = gmres(
            |v, o| {
                for (i, row) in a.iter().enumerate() {
                    o[i] = row.iter().zip(v).map(|(r, x)| r * x).sum();
                }
            },
            &b,
            &mut x,
            GmresOptions { tol: 1e-12, restart: 8, max_restarts: 50 },
        );
        assert!(out.converged);
        let err: f64 = x.iter().zip(&xs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![Complex64::new(1.0, 1.0); 4];
        let out = gmres(|v, o| o.copy_from_slice(v), &[Complex64::new(0.0, 0.0); 4], &mut x, GmresOptions::default());
        assert!(out.converged);
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }
}
