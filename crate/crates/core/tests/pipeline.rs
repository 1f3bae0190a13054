use conelab::grid::{random_test_field, read_field, write_field, Band, GridSpec};
use conelab::report::{read_csv, write_csv};
use conelab::rng::SeedKey;
use conelab::sweep::{run_sweep, PieceRecord, SectorSelection, SweepConfig};

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("conelab-pipeline-{}-{name}", std::process::id()))
}

#[test]
fn sweep_csv_roundtrip() {
    let cfg = SweepConfig { lambdas: vec![512.0], trials: 2, sectors: SectorSelection::Representative, ..SweepConfig::default() };
    let recs: Vec<PieceRecord> = run_sweep(&cfg).unwrap().iter().map(|r| PieceRecord::from_norms(r, cfg.seed)).collect();
    assert_eq!(recs.len(), 2);
    for r in &recs {
        assert!(r.l4_lower <= 1.05 * r.interp_upper);
        assert!(r.l2_norm <= 1.0);
        assert!(r.mass_capture >= 0.95);
    }
    let path = tmp("sweep.csv");
    write_csv(&path, &["test".into()], &recs).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "lambda,j,m,delta,alpha,l2_norm,linf_upper,l4_lower,interp_upper,kernel_l1,mass_capture,seed");
    let back: Vec<PieceRecord> = read_csv(&path).unwrap();
    assert_eq!(back, recs);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn field_file_roundtrip() {
    let g = GridSpec::cubic(16, 2.0).unwrap();
    let f = random_test_field(SeedKey::new(8), &g, &Band::Full).unwrap().field;
    let path = tmp("field.bin");
    write_field(&path, &f, Some(8)).unwrap();
    let (back, header) = read_field(&path).unwrap();
    assert_eq!(header.seed, Some(8));
    let err = f.data.iter().zip(&back.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    // Samples are stored as f32.
    assert!(err < 1e-5 * f.data.iter().map(|v| v.norm()).fold(0.0, f64::max));
    std::fs::remove_file(&path).unwrap();
    let _ = std::fs::remove_file(path.with_extension("bin.json"));
}
