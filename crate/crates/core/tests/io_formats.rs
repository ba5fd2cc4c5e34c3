use cgolab::alessandrini::{acquire_samples, ProbeMode, ProbeSetup, SamplingPlan};
use cgolab::cgo::{build_cgo, make_zeta_pair};
use cgolab::forward::dtn_matrix;
use cgolab::grid::{sample_potential, FieldKind, Grid, PotentialSpec};
use cgolab::io::{
    decode_cgo, decode_dtn, decode_samples, encode_cgo, encode_dtn, encode_samples, read_field, reconstruction_json,
    samples_csv, write_reconstruction, write_samples, SAMPLES_CSV_HEADER, SCHEMA_VERSION,
};
use cgolab::quadrature::{SphereDesign, SphereDesignKind};
use cgolab::reconstruction::{reconstruct, ReconstructOptions};
use cgolab::LabError;

fn bump(g: &Grid) -> cgolab::grid::Potential {
    sample_potential(&PotentialSpec::gaussian([0.0; 3], 0.2, 1.0), g, 2.0).unwrap()
}

#[test]
fn cgo_solution_round_trip() {
    let g = Grid::new(1.0, 8).unwrap();
    let zeta = make_zeta_pair(1.0, 0.5, [0.0, 0.0, 1.0], 6.0, None).unwrap().zeta1;
    let sol = build_cgo(&bump(&g), &zeta, 1e-12, 100).unwrap();
    let bytes = encode_cgo(&sol);
    assert_eq!(&bytes[..8], b"CGOSOL01");
    assert_eq!(bytes.len(), 8 + 9 * 8 + 20 + 16 * 512);
    let back = decode_cgo(&bytes).unwrap();
    assert_eq!(back.zeta, sol.zeta);
    assert_eq!(back.residual, sol.residual);
    assert_eq!(back.iterations, sol.iterations);
    assert_eq!(back.psi.values, sol.psi.values);
    assert!(matches!(decode_cgo(&bytes[..bytes.len() - 1]), Err(LabError::Format(_))));
}

#[test]
fn dtn_round_trip_is_row_major() {
    let g = Grid::new(1.0, 8).unwrap();
    let m = dtn_matrix(&bump(&g), 1.1, 2).unwrap();
    let bytes = encode_dtn(&m);
    let n = m.dim();
    assert_eq!(&bytes[..8], b"CGODTN01");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize, n);
    assert_eq!(bytes.len(), 24 + 16 * n * n);
    // entry (0, 1) follows entry (0, 0)
    let re01 = f64::from_le_bytes(bytes[40..48].try_into().unwrap());
    assert_eq!(re01, m.entries[(0, 1)].re);
    let (k, cap, entries) = decode_dtn(&bytes).unwrap();
    assert_eq!((k, cap), (1.1, 2));
    assert_eq!(entries, m.entries);
    assert!(matches!(decode_dtn(&bytes[..20]), Err(LabError::Format(_))));
}

#[test]
fn samples_round_trip_in_both_encodings() {
    let g = Grid::new(1.0, 10).unwrap();
    let q1 = bump(&g);
    let q2 = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
    let setup = ProbeSetup::new(&q1, &q2, None).unwrap();
    let plan = SamplingPlan {
        k: 1.0,
        r_param: 3.0,
        t_max: 6.0,
        radial_count: 2,
        design: SphereDesign::new(SphereDesignKind::Octahedral).unwrap(),
        mode: ProbeMode::Oracle,
        noise: 0.0,
    };
    let mut set = acquire_samples(&setup, &plan).unwrap();
    set.samples[0].error_estimate = None;
    let back = decode_samples(&encode_samples(&set)).unwrap();
    assert_eq!(back.len(), set.samples.len());
    for (a, b) in set.samples.iter().zip(&back) {
        assert_eq!((a.r, a.omega, a.a, a.value, a.mode, a.error_estimate, a.weight), (b.r, b.omega, b.a, b.value, b.mode, b.error_estimate, b.weight));
    }

    let csv = samples_csv(&set);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SAMPLES_CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first.len(), 11);
    assert_eq!(first[0], SCHEMA_VERSION.to_string());
    assert_eq!(first[8], "oracle");
    assert_eq!(first[9], "");
    assert_eq!(first[1].parse::<f64>().unwrap(), set.samples[0].r);

    let dir = tempfile::tempdir().unwrap();
    let paths = write_samples(dir.path(), "s", &set).unwrap();
    assert!(paths.iter().all(|p| p.exists()));
}

#[test]
fn reconstruction_artifacts() {
    let g = Grid::new(0.55, 12).unwrap();
    let q1 = bump(&g);
    let q2 = sample_potential(&PotentialSpec::Zero, &g, 2.0).unwrap();
    let opts = ReconstructOptions { mode: ProbeMode::Oracle, radial_count: 4, ..ReconstructOptions::new(1.0, 3.0) };
    let res = reconstruct(&q1, &q2, &opts, None).unwrap();
    let json: serde_json::Value = serde_json::from_str(&reconstruction_json(&res).unwrap()).unwrap();
    assert_eq!(json["schema_version"], SCHEMA_VERSION);
    assert_eq!(json["regime"], "exact");
    assert_eq!(json["T"], 9.0);
    assert_eq!(json["error_h_minus_s"].as_f64().unwrap(), res.error_h_minus_s);
    assert!(json["diagnostics"]["i2"].is_number());

    let dir = tempfile::tempdir().unwrap();
    let paths = write_reconstruction(&dir.path().join("nested"), "rec", &res).unwrap();
    let field = read_field(&paths[0], FieldKind::Interior).unwrap();
    assert_eq!(field.values, res.q_hat.values);
    assert_eq!(field.grid.extent(), 0.55);
}
