//! Power-law fits of the two regimes of the stability estimate.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::io::SCHEMA_VERSION;
use crate::lab::sweep::StabilityRecord;

/// Least-squares line through `(x, y)` in the fit's log coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
    /// The `k` (Lipschitz fit) or noise level (logarithmic fit) held fixed.
    pub held_fixed: f64,
    pub expected: f64,
    pub accepted_range: [f64; 2],
    pub conforming: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub s: f64,
    /// `2s - n`.
    pub m: f64,
    /// `log err` against `log eps` at the largest `k`; expected slope 1.
    pub lipschitz: SlopeFit,
    /// `log err` against `log(k + log(1/eps))` at the smallest noise; expected slope `-m`.
    pub logarithmic: SlopeFit,
    /// Smallest `C` with `err <= C k^4 d + C (k + log(1/d))^{-m}` over all usable records.
    pub envelope_constant: f64,
    pub records_used: usize,
    pub conforming: bool,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn slope_fit(x: &[f64], y: &[f64], held_fixed: f64, expected: f64, range: [f64; 2]) -> SlopeFit {
    let (slope, intercept, residual_rms) = linear_fit(x, y);
    SlopeFit {
        slope,
        intercept,
        residual_rms,
        points: x.len(),
        held_fixed,
        expected,
        accepted_range: range,
        conforming: slope >= range[0] && slope <= range[1],
    }
}

/// Fits both regimes. Uses successful records with positive noise and error;
/// needs at least three noise levels and two wave numbers.
pub fn fit_stability(records: &[StabilityRecord], s: f64) -> Result<FitReport> {
    let m = 2.0 * s - 3.0;
    let usable: Vec<&StabilityRecord> = records
        .iter()
        .filter(|r| r.is_ok() && r.noise > 0.0 && r.error_h_minus_s > 0.0 && r.error_h_minus_s.is_finite())
        .collect();
    let noises = distinct(usable.iter().map(|r| r.noise));
    let ks = distinct(usable.iter().map(|r| r.k));
    if noises.len() < 3 || ks.len() < 2 {
        return Err(LabError::InsufficientData(format!(
            "need >= 3 noise levels at >= 2 wave numbers, have {} and {}",
            noises.len(),
            ks.len()
        )));
    }
    let k_fix = ks
        .iter()
        .rev()
        .find(|k| distinct(usable.iter().filter(|r| r.k == **k).map(|r| r.noise)).len() >= 3)
        .copied()
        .ok_or_else(|| LabError::InsufficientData("no wave number has three noise levels".into()))?;
    let (x, y): (Vec<f64>, Vec<f64>) = usable
        .iter()
        .filter(|r| r.k == k_fix)
        .map(|r| (r.noise.ln(), r.error_h_minus_s.ln()))
        .unzip();
    let lipschitz = slope_fit(&x, &y, k_fix, 1.0, [0.5, 1.5]);

    let eps_fix = noises
        .iter()
        .find(|e| distinct(usable.iter().filter(|r| r.noise == **e).map(|r| r.k)).len() >= 2)
        .copied()
        .ok_or_else(|| LabError::InsufficientData("no noise level has two wave numbers".into()))?;
    let (x, y): (Vec<f64>, Vec<f64>) = usable
        .iter()
        .filter(|r| r.noise == eps_fix)
        .map(|r| ((r.k + (1.0 / r.noise).ln()).ln(), r.error_h_minus_s.ln()))
        .unzip();
    let logarithmic = slope_fit(&x, &y, eps_fix, -m, [-2.0 * m, -0.5 * m]);

    let envelope_constant = usable
        .iter()
        .filter(|r| r.dist_proxy > 0.0 && r.dist_proxy < 1.0)
        .map(|r| {
            let d = r.dist_proxy;
            r.error_h_minus_s / (r.k.powi(4) * d + (r.k + (1.0 / d).ln()).powf(-m))
        })
        .fold(0.0, f64::max);
    let conforming = lipschitz.conforming && logarithmic.conforming;
    Ok(FitReport {
        schema_version: SCHEMA_VERSION,
        s,
        m,
        lipschitz,
        logarithmic,
        envelope_constant,
        records_used: usable.len(),
        conforming,
    })
}
