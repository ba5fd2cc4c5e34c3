//! Thin wrappers over `rustfft` / `rustdct` for cubic arrays stored x-fastest.

use std::sync::Arc;

use num_complex::Complex64;
use rustdct::{DctPlanner, Dst1};
use rustfft::{Fft, FftPlanner};

/// Unnormalized 3D FFT on an `n^3` cube (x-fastest layout).
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `X[m] = sum_j x[j] exp(-2 pi i j m / n)` along each axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the `1/n^3` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        // x lines are contiguous
        plan.process(data);
        let mut lines = vec![Complex64::new(0.0, 0.0); n * n * n];
        // y lines
        for k in 0..n {
            for i in 0..n {
                let line = &mut lines[(k * n + i) * n..(k * n + i + 1) * n];
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[i + n * (j + n * k)];
                }
            }
        }
        plan.process(&mut lines);
        for k in 0..n {
            for i in 0..n {
                let line = &lines[(k * n + i) * n..(k * n + i + 1) * n];
                for (j, v) in line.iter().enumerate() {
                    data[i + n * (j + n * k)] = *v;
                }
            }
        }
        // z lines
        for j in 0..n {
            for i in 0..n {
                let line = &mut lines[(j * n + i) * n..(j * n + i + 1) * n];
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[i + n * (j + n * k)];
                }
            }
        }
        plan.process(&mut lines);
        for j in 0..n {
            for i in 0..n {
                let line = &lines[(j * n + i) * n..(j * n + i + 1) * n];
                for (k, v) in line.iter().enumerate() {
                    data[i + n * (j + n * k)] = *v;
                }
            }
        }
    }
}

/// Unnormalized 2D FFT on an `n x n` square (first index fastest).
pub fn fft2_forward(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(n);
    plan.process(data);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        for (b, v) in col.iter_mut().enumerate() {
            *v = data[a + n * b];
        }
        plan.process(&mut col);
        for (b, v) in col.iter().enumerate() {
            data[a + n * b] = *v;
        }
    }
}

/// 3D type-I discrete sine transform over an `m^3` cube of complex values.
///
/// Applying it twice multiplies by `(2 / (m + 1))^{-3}`; see [`Dst3::inverse_scale`].
pub struct Dst3 {
    m: usize,
    plan: Arc<dyn Dst1<f64>>,
}

impl Dst3 {
    pub fn new(m: usize) -> Self {
        let mut planner = DctPlanner::new();
        Self {
            m,
            plan: planner.plan_dst1(m),
        }
    }

    pub fn inverse_scale(&self) -> f64 {
        let f = 2.0 / (self.m + 1) as f64;
        f * f * f
    }

    pub fn transform(&self, data: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m);
        let mut re = vec![0.0; m];
        let mut im = vec![0.0; m];
        let mut scratch = vec![0.0; self.plan.get_scratch_len()];
        let mut line = |idx: &dyn Fn(usize) -> usize, data: &mut [Complex64]| {
            for t in 0..m {
                let v = data[idx(t)];
                re[t] = v.re;
                im[t] = v.im;
            }
            // rustdct expects zeroed scratch for the DST-I padding entries
            scratch.iter_mut().for_each(|v| *v = 0.0);
            self.plan.process_dst1_with_scratch(&mut re, &mut scratch);
            scratch.iter_mut().for_each(|v| *v = 0.0);
            self.plan.process_dst1_with_scratch(&mut im, &mut scratch);
            for t in 0..m {
                data[idx(t)] = Complex64::new(re[t], im[t]);
            }
        };
        for a in 0..m {
            for b in 0..m {
                line(&|t| t + m * (a + m * b), data);
            }
        }
        for a in 0..m {
            for b in 0..m {
                line(&|t| a + m * (t + m * b), data);
            }
        }
        for a in 0..m {
            for b in 0..m {
                line(&|t| a + m * (b + m * t), data);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft3_round_trip() {
        let n = 6;
        let f = Fft3::new(n);
        let orig: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut d = orig.clone();
        f.forward(&mut d);
        f.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fft3_single_mode() {
        let n = 8;
        let f = Fft3::new(n);
        let (mx, my, mz) = (1usize, 2usize, 3usize);
        let mut d: Vec<Complex64> = (0..n * n * n)
            .map(|idx| {
                let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
                let ph = 2.0 * std::f64::consts::PI * ((mx * i + my * j + mz * k) as f64) / n as f64;
                Complex64::from_polar(1.0, ph)
            })
            .collect();
        f.forward(&mut d);
        let peak = mx + n * (my + n * mz);
        assert!((d[peak].re - (n * n * n) as f64).abs() < 1e-9);
        let rest: f64 = d.iter().enumerate().filter(|(i, _)| *i != peak).map(|(_, v)| v.norm()).sum();
        assert!(rest < 1e-8);
    }

    #[test]
    fn dst3_round_trip() {
        for m in [5, 30] {
            dst3_round_trip_size(m);
        }
    }

    fn dst3_round_trip_size(m: usize) {
        let t = Dst3::new(m);
        let orig: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64) * 0.1))
            .collect();
        let mut d = orig.clone();
        t.transform(&mut d);
        t.transform(&mut d);
        let s = t.inverse_scale();
        let scale = orig.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a * s - b).norm() < 1e-12 * scale, "{} vs {}", a * s, b);
        }
    }
}
