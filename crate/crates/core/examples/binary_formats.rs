//! Write and read back the field, CGO and DtN binary blocks.

use cgolab::cgo::{build_cgo, make_zeta_pair};
use cgolab::forward::dtn_matrix;
use cgolab::grid::{sample_potential, FieldKind, Grid, PotentialSpec};
use cgolab::io::{decode_cgo, decode_dtn, encode_cgo, encode_dtn, read_bytes, read_field, write_bytes, write_field};

fn main() -> cgolab::Result<()> {
    let dir = std::env::temp_dir().join("cgolab_formats");
    let grid = Grid::new(1.0, 12)?;
    let q = sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 1.0), &grid, 2.0)?;

    let path = dir.join("q.field");
    write_field(&path, &q.field)?;
    let back = read_field(&path, FieldKind::Periodic)?;
    println!("{}: {} bytes, identical {}", path.display(), read_bytes(&path)?.len(), back.values == q.field.values);

    let zeta = make_zeta_pair(1.0, 1.0, [1.0, 0.0, 0.0], 8.0, None)?.zeta1;
    let sol = build_cgo(&q, &zeta, 1e-10, 100)?;
    let path = dir.join("psi.cgo");
    write_bytes(&path, &encode_cgo(&sol))?;
    let rec = decode_cgo(&read_bytes(&path)?)?;
    println!("{}: k={} iterations={} residual={:.2e}", path.display(), rec.zeta.k, rec.iterations, rec.residual);

    let m = dtn_matrix(&q, 1.0, 2)?;
    let path = dir.join("q.dtn");
    write_bytes(&path, &encode_dtn(&m))?;
    let (k, cap, entries) = decode_dtn(&read_bytes(&path)?)?;
    println!("{}: k={k} degree cap={cap} dimension={}", path.display(), entries.nrows());
    Ok(())
}
