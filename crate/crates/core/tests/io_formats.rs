use std::path::Path;

use wyf_core::grid::{sample_gaussian, Field2D, Grid2D};
use wyf_core::io::config::RunConfig;
use wyf_core::io::csv::{read_profile, write_profile};
use wyf_core::io::snapshot::{
    decode_snapshot, read_snapshot, snapshot_file_name, write_snapshot, FieldId, SnapshotHeader, HEADER_LEN, MAGIC,
};
use wyf_core::zk::solve_radial_default;
use wyf_core::{Error, Grid};

fn golden() -> Vec<u8> {
    std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_snapshot.bin")).unwrap()
}

#[test]
fn golden_snapshot_layout() {
    let bytes = golden();
    assert_eq!(&bytes[..8], MAGIC);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 16);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
    assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2.5);
    assert_eq!(bytes[40], 0);
    assert!(bytes[41..48].iter().all(|&b| b == 0));
    let (h, f) = decode_snapshot(&bytes).unwrap();
    assert_eq!(h.field_id, FieldId::Xi);
    // Second value of the second row: i = 1, j = 1.
    let at = HEADER_LEN + 8 * (16 + 1);
    assert_eq!(f.interior_row(1)[1], f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()));
}

#[test]
fn corrupt_snapshots_are_rejected() {
    let bytes = golden();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode_snapshot(&bad), Err(Error::BadMagic)));
    assert!(matches!(decode_snapshot(&bytes[..bytes.len() - 1]), Err(Error::Truncated { .. })));
    assert!(matches!(decode_snapshot(&bytes[..20]), Err(Error::Truncated { .. })));
    let mut bad = bytes.clone();
    bad[40] = 7;
    assert!(decode_snapshot(&bad).is_err());
    let mut bad = bytes;
    bad.push(0);
    assert!(decode_snapshot(&bad).is_err());
}

#[test]
fn snapshot_file_round_trip_on_paper_grid() {
    let dir = tempfile::tempdir().unwrap();
    let field = sample_gaussian(Grid::paper(), 3.0, 0.0, 1.0);
    let header = SnapshotHeader::for_field(&field, 12.5, FieldId::Eta).unwrap();
    let path = dir.path().join(snapshot_file_name(FieldId::Eta, 125_000));
    assert!(path.ends_with("eta_000125000.bin"));
    write_snapshot(&path, &field, &header).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 161_648);
    let (h, back) = read_snapshot(&path).unwrap();
    assert_eq!(h, header);
    assert_eq!(back.max_abs_diff(&field), 0.0);
    // Ghosts are rebuilt from the boundary rule.
    assert_eq!(back.data(), field.data());
}

#[test]
fn missing_snapshot_is_io_error() {
    assert!(matches!(read_snapshot(Path::new("/nonexistent/xi.bin")), Err(Error::Io { .. })));
}

#[test]
fn profile_csv_round_trip() {
    let p = solve_radial_default(1.0).unwrap();
    let mut buf = Vec::new();
    write_profile(&mut buf, &p).unwrap();
    let back = read_profile(&buf[..], 1.0).unwrap();
    assert_eq!(back.values, p.values);
    for r in [0.0, 0.37, 1.5, 4.0, 9.99] {
        assert_eq!(back.eval(r), p.eval(r));
    }
}

#[test]
fn profile_with_uneven_radii_is_rejected() {
    let text = "r,phi\n0.0,2.0\n0.1,1.9\n0.25,1.7\n0.3,1.6\n0.4,1.5\n";
    assert!(read_profile(text.as_bytes(), 1.0).is_err());
}

#[test]
fn config_text_round_trip() {
    let text = "grid.nx = 64\ngrid.ny = 32\nshear.f0 = -1.0\nshear.f1 = 1.2\ninit.kind = two_zk\n\
                init.c2 = 1.0\ninit.x2 = 5.0\ninit.y2 = 1.0\nce.slice = y=1.0\nrun_label = pair\n";
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.grid.nx, 64);
    assert_eq!(cfg.shear.f1, 1.2);
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
}

#[test]
fn config_errors_carry_line_numbers() {
    match RunConfig::parse("grid.nx = 64\ngrid.ny = many\n") {
        Err(Error::Config { line, .. }) => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
    match RunConfig::parse("# comment\n\ninit.kind = two_zk\n") {
        Err(Error::Config { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(RunConfig::parse("shear.f1 = 1\nshear.f1 = 2\n").is_err());
}

#[test]
fn generic_grid_in_single_precision() {
    let g = Grid2D::<f32>::new(16, 8, 4.0, 2.0).unwrap();
    let f = Field2D::from_fn(g, |x: f32, y: f32| x * y);
    assert_eq!(f.interior_row(0).len(), 16);
}
