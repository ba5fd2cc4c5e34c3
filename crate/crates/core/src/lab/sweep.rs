//! The `(k, noise)` experiment grid: cell execution, persistence and resume.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alessandrini::ProbeMode;
use crate::error::{LabError, Result};
use crate::forward::{dtn_matrix_with, potential_id, BoundaryBasis, DtnMatrix, HelmholtzSolver, NoiseSpec};
use crate::grid::{sample_potential, Potential, PotentialSpec};
use crate::io::{decode_dtn, encode_dtn, write_bytes, SCHEMA_VERSION};
use crate::lab::config::SweepConfig;
use crate::lab::report::{read_records_csv, write_records_csv};
use crate::reconstruction::{reconstruct, DtnData, ReconstructionResult};

/// One row of the sweep table. Failed cells keep `k`, `noise` and the error
/// tag and carry NaN in the measured columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub schema_version: u32,
    pub k: f64,
    pub noise: f64,
    pub status: String,
    pub error_tag: String,
    pub regime: String,
    pub dist_proxy: f64,
    /// `A = dist_proxy^2`.
    pub a_value: f64,
    pub r_param: f64,
    pub t: f64,
    pub error_h_minus_s: f64,
    /// `error_h_minus_s / ||q1 - q2||_{H^{-s}}`.
    pub relative_error: f64,
    pub i1: f64,
    pub i2: Option<f64>,
    pub i3: f64,
    pub torus_surrogate: f64,
    pub max_psi_h_s_norm: f64,
    pub sample_count: usize,
    pub failed_samples: usize,
    /// Kept out of the CSV so reruns stay byte-identical; see `timings.csv`.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl StabilityRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn from_result(noise: f64, res: &ReconstructionResult) -> Self {
        let d = &res.diagnostics;
        Self {
            schema_version: SCHEMA_VERSION,
            k: res.k,
            noise,
            status: "ok".into(),
            error_tag: String::new(),
            regime: res.policy.regime.as_str().into(),
            dist_proxy: res.dist_proxy,
            a_value: res.dist_proxy * res.dist_proxy,
            r_param: res.policy.r_param,
            t: res.policy.t,
            error_h_minus_s: res.error_h_minus_s,
            relative_error: res.error_h_minus_s / d.q_tilde_h_minus_s,
            i1: d.i1,
            i2: d.i2,
            i3: d.i3,
            torus_surrogate: d.torus_surrogate,
            max_psi_h_s_norm: d.max_psi_h_s_norm,
            sample_count: d.sample_count,
            failed_samples: d.failed_samples,
            wall_time_s: d.wall_time_s,
        }
    }

    pub fn failed(k: f64, noise: f64, r_param: f64, err: &LabError, wall_time_s: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k,
            noise,
            status: "failed".into(),
            error_tag: err.tag().into(),
            regime: String::new(),
            dist_proxy: f64::NAN,
            a_value: f64::NAN,
            r_param,
            t: f64::NAN,
            error_h_minus_s: f64::NAN,
            relative_error: f64::NAN,
            i1: f64::NAN,
            i2: None,
            i3: f64::NAN,
            torus_surrogate: f64::NAN,
            max_psi_h_s_norm: f64::NAN,
            sample_count: 0,
            failed_samples: 0,
            wall_time_s,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub records: Vec<StabilityRecord>,
    /// `<output_dir>/<config hash>`.
    pub run_dir: PathBuf,
    pub records_csv: PathBuf,
    /// Cells read back from an earlier run instead of recomputed.
    pub resumed: usize,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Noise seed of cell `(ki, ni)`.
pub fn cell_seed(seed: u64, ki: usize, ni: usize) -> u64 {
    let mut z = seed ^ ((ki as u64) << 32 | ni as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_name(ki: usize, ni: usize) -> String {
    format!("cell_k{ki:02}_e{ni:02}")
}

/// DtN for `q` at `k`, read from `cache` when a matching block exists.
pub fn cached_dtn(q: &Potential, k: f64, basis: &BoundaryBasis, cache: Option<&Path>) -> Result<DtnMatrix> {
    let q_id = potential_id(q);
    let path = cache.map(|dir| dir.join(format!("{q_id}_k{k}_d{}.dtn", basis.degree_cap)));
    if let Some(p) = &path {
        if let Ok(bytes) = fs::read(p) {
            if let Ok((kk, cap, entries)) = decode_dtn(&bytes) {
                if kk == k && cap == basis.degree_cap && entries.nrows() == basis.len() {
                    return Ok(DtnMatrix { basis: basis.clone(), entries, k, degree_cap: cap, q_id });
                }
            }
        }
    }
    let m = dtn_matrix_with(&HelmholtzSolver::new(q, k)?, basis, q)?;
    if let Some(p) = &path {
        write_bytes(p, &encode_dtn(&m))?;
    }
    Ok(m)
}

/// [`DtnData`] with each matrix looked up in `cache` first.
pub fn cached_dtn_data(q1: &Potential, q2: &Potential, k: f64, degree_cap: usize, cache: Option<&Path>) -> Result<DtnData> {
    let basis = BoundaryBasis::new(q1.grid(), degree_cap)?;
    let lambda1 = cached_dtn(q1, k, &basis, cache)?;
    let lambda2 = cached_dtn(q2, k, &basis, cache)?;
    let zero = sample_potential(&PotentialSpec::Zero, &q1.grid(), q1.s)?;
    let reference = cached_dtn(&zero, k, &basis, cache)?;
    Ok(DtnData { lambda1, lambda2, reference })
}

fn run_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every `(k, noise)` cell. DtN matrices are computed once per `k` and
/// cached under the run directory; finished cells are skipped on rerun.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepOutcome> {
    config.validate()?;
    let run_dir = config.output_dir.join(config.hash());
    let cells_dir = run_dir.join("cells");
    let dtn_dir = run_dir.join("dtn");
    fs::create_dir_all(&cells_dir)?;
    fs::write(run_dir.join("config.toml"), config.to_toml())?;
    let progress = Mutex::new(OpenOptions::new().create(true).append(true).open(run_dir.join("progress.log"))?);
    let log = |line: String| {
        let mut f = progress.lock().expect("progress log");
        let _ = writeln!(f, "{line}");
    };

    let (q1, q2) = config.potentials()?;
    let r_param = config.resolve_r(&q1, &q2)?;
    let boundary = config.reconstruction.mode == ProbeMode::Boundary;

    let run_k = |ki: usize| -> Vec<(StabilityRecord, bool)> {
        let k = config.k_list[ki];
        let mut pending = Vec::new();
        let mut out: Vec<Option<(StabilityRecord, bool)>> = vec![None; config.noise_list.len()];
        for (ni, slot) in out.iter_mut().enumerate() {
            let path = cells_dir.join(format!("{}.csv", cell_name(ki, ni)));
            match read_records_csv(&path) {
                Ok(mut rows) if rows.len() == 1 => {
                    let mut rec = rows.remove(0);
                    rec.wall_time_s = fs::read_to_string(path.with_extension("time"))
                        .ok()
                        .and_then(|t| t.trim().parse().ok())
                        .unwrap_or(0.0);
                    *slot = Some((rec, true));
                }
                _ => pending.push(ni),
            }
        }
        if pending.is_empty() {
            return out.into_iter().map(|r| r.expect("cell filled")).collect();
        }
        let start = Instant::now();
        let dtn = if boundary {
            Some(cached_dtn_data(&q1, &q2, k, config.reconstruction.degree_cap, Some(&dtn_dir)))
        } else {
            None
        };
        for ni in pending {
            let noise = config.noise_list[ni];
            let cell_start = Instant::now();
            let spec = (noise > 0.0).then(|| NoiseSpec {
                epsilon: noise,
                seed: cell_seed(config.seed, ki, ni),
                model: config.reconstruction.noise_model,
            });
            let opts = config.reconstruct_options(k, r_param, spec);
            let result = match &dtn {
                Some(Err(e)) => Err(clone_error(e)),
                Some(Ok(d)) => reconstruct(&q1, &q2, &opts, Some(d)),
                None => reconstruct(&q1, &q2, &opts, None),
            };
            let rec = match result {
                Ok(res) => {
                    let mut rec = StabilityRecord::from_result(noise, &res);
                    rec.wall_time_s = cell_start.elapsed().as_secs_f64();
                    rec
                }
                Err(e) => {
                    log(format!("k={k} noise={noise} failed: {e}"));
                    StabilityRecord::failed(k, noise, r_param, &e, cell_start.elapsed().as_secs_f64())
                }
            };
            let path = cells_dir.join(format!("{}.csv", cell_name(ki, ni)));
            let persisted = write_records_csv(&path, std::slice::from_ref(&rec))
                .and_then(|_| Ok(fs::write(path.with_extension("time"), format!("{}\n", rec.wall_time_s))?));
            if let Err(e) = persisted {
                log(format!("k={k} noise={noise} not persisted: {e}"));
            }
            log(format!("k={k} noise={noise} status={} error={:e}", rec.status, rec.error_h_minus_s));
            out[ni] = Some((rec, false));
        }
        log(format!("k={k} finished in {:.1}s", start.elapsed().as_secs_f64()));
        out.into_iter().map(|r| r.expect("cell filled")).collect()
    };

    let per_k: Vec<Vec<(StabilityRecord, bool)>> =
        run_pool(workers, || (0..config.k_list.len()).into_par_iter().map(run_k).collect())?;
    let mut records = Vec::new();
    let mut resumed = 0;
    for (rec, was_resumed) in per_k.into_iter().flatten() {
        resumed += was_resumed as usize;
        records.push(rec);
    }
    let records_csv = run_dir.join("records.csv");
    write_records_csv(&records_csv, &records)?;
    let mut timings = String::from("k,noise,wall_time_s\n");
    for r in &records {
        timings.push_str(&format!("{},{},{}\n", r.k, r.noise, r.wall_time_s));
    }
    fs::write(run_dir.join("timings.csv"), timings)?;
    Ok(SweepOutcome { records, run_dir, records_csv, resumed })
}

fn clone_error(e: &LabError) -> LabError {
    match e {
        LabError::Config(m) => LabError::Config(m.clone()),
        LabError::InvalidFrequencyRange { lhs, rhs } => LabError::InvalidFrequencyRange { lhs: *lhs, rhs: *rhs },
        LabError::DegenerateSymbol { min_symbol, guard } => {
            LabError::DegenerateSymbol { min_symbol: *min_symbol, guard: *guard }
        }
        LabError::NoContraction { iterations, residual } => {
            LabError::NoContraction { iterations: *iterations, residual: *residual }
        }
        LabError::ResonantFrequency { k, detail } => LabError::ResonantFrequency { k: *k, detail: detail.clone() },
        LabError::InsufficientData(m) => LabError::InsufficientData(m.clone()),
        LabError::Format(m) => LabError::Format(m.clone()),
        LabError::Io(e) => LabError::Io(std::io::Error::new(e.kind(), e.to_string())),
    }
}
