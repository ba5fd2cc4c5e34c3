//! Little-endian binary blocks and JSON/CSV emitters for lab artifacts.
//!
//! * field: `"CGOLAB01"`, extent `f64`, `N` `u32`, then `N^3` `(re, im)` `f64` pairs, x fastest;
//! * CGO solution: `"CGOSOL01"`, `eta[3]`, `xi[3]`, `k`, residual, iterations (all `f64`), then a field block;
//! * DtN matrix: `"CGODTN01"`, dimension `u32`, `k` `f64`, degree cap `u32`, then row-major `(re, im)` pairs;
//! * Fourier samples: `"CGOFS001"`, count `u32`, then per sample
//!   `r, w1, w2, w3, a, re, im, mode, error_estimate, weight` as `f64`
//!   (`mode` 0 oracle / 1 boundary, missing estimates stored as NaN).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::alessandrini::{FourierSample, FourierSampleSet, ProbeMode};
use crate::cgo::{CgoSolution, ZetaVector};
use crate::error::{LabError, Result};
use crate::forward::DtnMatrix;
use crate::grid::{FieldKind, Grid, ScalarField};
use crate::reconstruction::ReconstructionResult;

pub const SCHEMA_VERSION: u32 = 1;

pub const FIELD_MAGIC: &[u8; 8] = b"CGOLAB01";
pub const CGO_MAGIC: &[u8; 8] = b"CGOSOL01";
pub const DTN_MAGIC: &[u8; 8] = b"CGODTN01";
pub const SAMPLES_MAGIC: &[u8; 8] = b"CGOFS001";

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(LabError::Format(format!("truncated block: need {} bytes at offset {}", n, self.pos)));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn magic(&mut self, expect: &[u8; 8]) -> Result<()> {
        let got = self.take(8)?;
        if got != expect {
            return Err(LabError::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(expect)
            )));
        }
        Ok(())
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn complex(&mut self) -> Result<Complex64> {
        Ok(Complex64::new(self.f64()?, self.f64()?))
    }
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_complex(buf: &mut Vec<u8>, v: Complex64) {
    put_f64(buf, v.re);
    put_f64(buf, v.im);
}

pub fn encode_field(field: &ScalarField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(20 + 16 * field.values.len());
    buf.extend_from_slice(FIELD_MAGIC);
    put_f64(&mut buf, field.grid.extent());
    buf.extend_from_slice(&(field.grid.n() as u32).to_le_bytes());
    for v in &field.values {
        put_complex(&mut buf, *v);
    }
    buf
}

fn decode_field_at(cur: &mut Cursor, kind: FieldKind) -> Result<ScalarField> {
    cur.magic(FIELD_MAGIC)?;
    let extent = cur.f64()?;
    let n = cur.u32()? as usize;
    let grid = Grid::new(extent, n).map_err(|e| LabError::Format(e.to_string()))?;
    let values = (0..grid.len()).map(|_| cur.complex()).collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(grid, kind, values)
}

/// Decodes a field block; the kind is not stored and is supplied by the caller.
pub fn decode_field(bytes: &[u8], kind: FieldKind) -> Result<ScalarField> {
    decode_field_at(&mut Cursor { data: bytes, pos: 0 }, kind)
}

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    write_bytes(path, &encode_field(field))
}

pub fn read_field(path: &Path, kind: FieldKind) -> Result<ScalarField> {
    decode_field(&fs::read(path)?, kind)
}

/// Header values of a stored CGO solution.
#[derive(Clone, Debug, PartialEq)]
pub struct CgoRecord {
    pub zeta: ZetaVector,
    pub residual: f64,
    pub iterations: usize,
    pub psi: ScalarField,
}

pub fn encode_cgo(sol: &CgoSolution) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(CGO_MAGIC);
    for v in sol.zeta.eta.iter().chain(&sol.zeta.xi) {
        put_f64(&mut buf, *v);
    }
    put_f64(&mut buf, sol.zeta.k);
    put_f64(&mut buf, sol.residual);
    put_f64(&mut buf, sol.iterations as f64);
    buf.extend(encode_field(&sol.psi));
    buf
}

pub fn decode_cgo(bytes: &[u8]) -> Result<CgoRecord> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    cur.magic(CGO_MAGIC)?;
    let mut v = [0.0; 6];
    for x in v.iter_mut() {
        *x = cur.f64()?;
    }
    let k = cur.f64()?;
    let residual = cur.f64()?;
    let iterations = cur.f64()? as usize;
    let psi = decode_field_at(&mut cur, FieldKind::Periodic)?;
    Ok(CgoRecord { zeta: ZetaVector { eta: [v[0], v[1], v[2]], xi: [v[3], v[4], v[5]], k }, residual, iterations, psi })
}

pub fn encode_dtn(m: &DtnMatrix) -> Vec<u8> {
    let n = m.dim();
    let mut buf = Vec::with_capacity(24 + 16 * n * n);
    buf.extend_from_slice(DTN_MAGIC);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    put_f64(&mut buf, m.k);
    buf.extend_from_slice(&(m.degree_cap as u32).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            put_complex(&mut buf, m.entries[(i, j)]);
        }
    }
    buf
}

/// Stored DtN block: `(dimension, k, degree cap, entries)`.
pub fn decode_dtn(bytes: &[u8]) -> Result<(f64, usize, DMatrix<Complex64>)> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    cur.magic(DTN_MAGIC)?;
    let n = cur.u32()? as usize;
    let k = cur.f64()?;
    let cap = cur.u32()? as usize;
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = cur.complex()?;
        }
    }
    Ok((k, cap, entries))
}

pub fn encode_samples(set: &FourierSampleSet) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(SAMPLES_MAGIC);
    buf.extend_from_slice(&(set.samples.len() as u32).to_le_bytes());
    for s in &set.samples {
        let mode = match s.mode {
            ProbeMode::Oracle => 0.0,
            ProbeMode::Boundary => 1.0,
        };
        for v in [
            s.r,
            s.omega[0],
            s.omega[1],
            s.omega[2],
            s.a,
            s.value.re,
            s.value.im,
            mode,
            s.error_estimate.unwrap_or(f64::NAN),
            s.weight,
        ] {
            put_f64(&mut buf, v);
        }
    }
    buf
}

pub fn decode_samples(bytes: &[u8]) -> Result<Vec<FourierSample>> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    cur.magic(SAMPLES_MAGIC)?;
    let n = cur.u32()? as usize;
    (0..n)
        .map(|_| {
            let mut v = [0.0; 10];
            for x in v.iter_mut() {
                *x = cur.f64()?;
            }
            Ok(FourierSample {
                r: v[0],
                omega: [v[1], v[2], v[3]],
                a: v[4],
                value: Complex64::new(v[5], v[6]),
                mode: if v[7] == 0.0 { ProbeMode::Oracle } else { ProbeMode::Boundary },
                error_estimate: if v[8].is_nan() { None } else { Some(v[8]) },
                weight: v[9],
                basis_truncation: false,
                psi_h_s_norm: f64::NAN,
            })
        })
        .collect()
}

pub const SAMPLES_CSV_HEADER: &str = "schema_version,r,omega1,omega2,omega3,a,re,im,mode,error_estimate,weight";

pub fn samples_csv(set: &FourierSampleSet) -> String {
    let mut out = format!("{SAMPLES_CSV_HEADER}\n");
    for s in &set.samples {
        let est = s.error_estimate.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{SCHEMA_VERSION},{},{},{},{},{},{},{},{},{},{}\n",
            s.r,
            s.omega[0],
            s.omega[1],
            s.omega[2],
            s.a,
            s.value.re,
            s.value.im,
            s.mode.as_str(),
            est,
            s.weight
        ));
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.bin`.
pub fn write_samples(dir: &Path, stem: &str, set: &FourierSampleSet) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let bin = dir.join(format!("{stem}.bin"));
    write_bytes(&csv, samples_csv(set).as_bytes())?;
    write_bytes(&bin, &encode_samples(set))?;
    Ok(vec![csv, bin])
}

#[derive(Serialize)]
struct ReconstructionMeta<'a> {
    schema_version: u32,
    k: f64,
    #[serde(rename = "R")]
    r_param: f64,
    p: f64,
    #[serde(rename = "T")]
    t: f64,
    regime: &'static str,
    dist_proxy: f64,
    error_h_minus_s: f64,
    m: f64,
    diagnostics: &'a crate::reconstruction::Diagnostics,
}

pub fn reconstruction_json(res: &ReconstructionResult) -> Result<String> {
    let meta = ReconstructionMeta {
        schema_version: SCHEMA_VERSION,
        k: res.k,
        r_param: res.policy.r_param,
        p: res.policy.p,
        t: res.policy.t,
        regime: res.policy.regime.as_str(),
        dist_proxy: res.dist_proxy,
        error_h_minus_s: res.error_h_minus_s,
        m: res.m,
        diagnostics: &res.diagnostics,
    };
    serde_json::to_string_pretty(&meta).map_err(|e| LabError::Format(e.to_string()))
}

/// Writes `<stem>.field` (q_hat) and `<stem>.json` (metadata).
pub fn write_reconstruction(dir: &Path, stem: &str, res: &ReconstructionResult) -> Result<Vec<PathBuf>> {
    let field = dir.join(format!("{stem}.field"));
    let json = dir.join(format!("{stem}.json"));
    write_field(&field, &res.q_hat)?;
    write_bytes(&json, reconstruction_json(res)?.as_bytes())?;
    Ok(vec![field, json])
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}
