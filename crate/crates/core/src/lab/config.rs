//! Sweep configuration (TOML) and its fingerprint.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alessandrini::{ProbeMode, DEFAULT_C_EMP};
use crate::cgo::{estimate_cstar, CstarOptions};
use crate::error::{LabError, Result};
use crate::forward::NoiseModel;
use crate::grid::{sample_potential, Grid, Potential, PotentialSpec};
use crate::quadrature::SphereDesignKind;
use crate::reconstruction::{ErrorOptions, NoiseScale, ReconstructOptions};

/// Environment variable holding the number of sweep workers.
pub const WORKERS_ENV: &str = "CGOLAB_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extent: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.extent, self.n)
    }
}

fn default_p() -> f64 {
    0.25
}
fn default_s() -> f64 {
    2.0
}
fn default_mode() -> ProbeMode {
    ProbeMode::Boundary
}
fn default_radial() -> usize {
    16
}
fn default_design() -> SphereDesignKind {
    SphereDesignKind::Lebedev26
}
fn default_degree_cap() -> usize {
    6
}
fn default_c_emp() -> f64 {
    DEFAULT_C_EMP
}

/// Reconstruction settings shared by every cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    /// Splitting radius; `max(2 C* M, 4)` when absent.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r_param: Option<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_mode")]
    pub mode: ProbeMode,
    #[serde(default = "default_radial")]
    pub radial_count: usize,
    #[serde(default = "default_design")]
    pub design: SphereDesignKind,
    #[serde(default = "default_degree_cap")]
    pub degree_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    #[serde(default)]
    pub noise_scale: NoiseScale,
    #[serde(default)]
    pub noise_model: NoiseModel,
    #[serde(default = "default_c_emp")]
    pub c_emp: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            r_param: None,
            p: default_p(),
            s: default_s(),
            mode: default_mode(),
            radial_count: default_radial(),
            design: default_design(),
            degree_cap: default_degree_cap(),
            t_cap: None,
            noise_scale: NoiseScale::default(),
            noise_model: NoiseModel::default(),
            c_emp: default_c_emp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub k_list: Vec<f64>,
    pub noise_list: Vec<f64>,
    pub grid: GridConfig,
    pub q1: PotentialSpec,
    pub q2: PotentialSpec,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| LabError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.reconstruction;
        if !(r.s > 1.5) {
            return Err(LabError::config(format!("s must exceed n/2 = 1.5, got {}", r.s)));
        }
        if self.k_list.is_empty() || self.noise_list.is_empty() {
            return Err(LabError::config("k_list and noise_list must be non-empty"));
        }
        if let Some(k) = self.k_list.iter().find(|k| !(**k >= 1.0) || !k.is_finite()) {
            return Err(LabError::config(format!("wave numbers must satisfy k >= 1, got {k}")));
        }
        let e_inv = (-1.0f64).exp();
        if let Some(e) = self.noise_list.iter().find(|e| !(**e >= 0.0 && **e <= e_inv)) {
            return Err(LabError::config(format!("noise levels must lie in [0, 1/e], got {e}")));
        }
        if let Some(rp) = r.r_param {
            if !(rp > 0.0) {
                return Err(LabError::config(format!("R must be positive, got {rp}")));
            }
        }
        if !(r.p > 0.0) || !(r.c_emp > 0.0) {
            return Err(LabError::config("p and c_emp must be positive"));
        }
        if r.degree_cap == 0 || r.radial_count == 0 {
            return Err(LabError::config("degree_cap and radial_count must be positive"));
        }
        let grid = self.grid.build()?;
        self.potentials_on(&grid)?;
        Ok(())
    }

    pub fn potentials_on(&self, grid: &Grid) -> Result<(Potential, Potential)> {
        let s = self.reconstruction.s;
        Ok((sample_potential(&self.q1, grid, s)?, sample_potential(&self.q2, grid, s)?))
    }

    pub fn potentials(&self) -> Result<(Potential, Potential)> {
        self.potentials_on(&self.grid.build()?)
    }

    /// SHA-256 over every physics-relevant field (everything but `output_dir`).
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output_dir = PathBuf::new();
        let json = serde_json::to_string(&physics).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(12).map(|b| format!("{b:02x}")).collect()
    }

    /// `R` from the config, or `max(2 C* M, 4)` with `C*` estimated at the smallest `k`.
    pub fn resolve_r(&self, q1: &Potential, q2: &Potential) -> Result<f64> {
        if let Some(r) = self.reconstruction.r_param {
            return Ok(r);
        }
        let k = self.k_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut best: f64 = 0.0;
        for q in [q1, q2] {
            let c = estimate_cstar(q, k, CstarOptions::default())?;
            if !c.is_finite() {
                return Err(LabError::config("no contraction found up to a_max; set R explicitly"));
            }
            best = best.max(2.0 * c * q1.h_s_norm.max(q2.h_s_norm));
        }
        Ok(best.max(4.0))
    }

    pub fn reconstruct_options(&self, k: f64, r_param: f64, noise: Option<crate::forward::NoiseSpec>) -> ReconstructOptions {
        let r = &self.reconstruction;
        ReconstructOptions {
            k,
            r_param,
            p: r.p,
            s: r.s,
            noise,
            mode: r.mode,
            radial_count: r.radial_count,
            design: r.design,
            degree_cap: r.degree_cap,
            t_cap: r.t_cap,
            noise_scale: r.noise_scale,
            c_emp: r.c_emp,
            error: ErrorOptions::default(),
        }
    }
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(LabError::config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
