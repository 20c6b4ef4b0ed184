use std::path::{Path, PathBuf};

use libor_core::{InitialCurve, TenorStructure};
use libor_lab::experiment::{verify_checks, Status};
use libor_lab::io::{read_curve, write_curve};
use libor_lab::{run_calibrate_mfm, run_compare, run_price, ExperimentConfig, LabError, Outcome};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small(name: &str, out: &Path, paths: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&configs().join(name)).unwrap();
    cfg.output.dir = out.to_path_buf();
    cfg.pricing.n_paths = paths;
    cfg.pricing.chunk_size = 2_000;
    cfg
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap()).collect()
}

#[test]
fn curve_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tenor = TenorStructure::new(0.5, 4).unwrap();
    let curve = InitialCurve::from_libors(tenor.clone(), &[0.03, 0.031, 0.033, 0.036]).unwrap();
    let path = dir.path().join("curve.csv");
    write_curve(&path, &curve).unwrap();
    let back = read_curve(&path, &tenor).unwrap();
    assert_eq!(back.bonds(), curve.bonds());
}

#[test]
fn curve_diagnostics_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let tenor = TenorStructure::new(0.5, 2).unwrap();
    let path = dir.path().join("curve.csv");
    std::fs::write(&path, "T_k,\"B(0,T_k)\"\n0.0,1.0\n0.75,0.98\n1.0,0.96\n").unwrap();
    match read_curve(&path, &tenor) {
        Err(LabError::Config(msg)) => assert!(msg.contains(":3:"), "{msg}"),
        other => panic!("{other:?}"),
    }
    std::fs::write(&path, "T_k,\"B(0,T_k)\"\n0.0,1.0\n0.5,x\n1.0,0.96\n").unwrap();
    match read_curve(&path, &tenor) {
        Err(LabError::Config(msg)) => {
            assert!(msg.contains(":3:") && msg.contains("column 2"), "{msg}")
        }
        other => panic!("{other:?}"),
    }
    std::fs::write(&path, "T_k,\"B(0,T_k)\"\n0.0,1.0\n0.5,0.98\n").unwrap();
    assert!(read_curve(&path, &tenor).is_err());
}

#[test]
fn zero_vols_give_zero_differences() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("figure1.toml", dir.path(), 4_000);
    cfg.vols.flat = Some(0.0);
    let out = run_compare(&cfg).unwrap();
    assert!(!out.failed);
    for scheme in ["lmm-frozen", "lmm-picard1", "lmm-taylor"] {
        let rows = read_rows(&dir.path().join(format!("compare_{scheme}.csv")));
        assert_eq!(rows.len(), 9 * cfg.pricing.strikes.len());
        for r in rows {
            assert_eq!(&r[6], "0", "{scheme}: {r:?}");
        }
    }
}

#[test]
fn compare_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let mut cfg = small("lmm_jump.toml", dir, 6_000);
        cfg.output.dump_paths = 3;
        run_compare(&cfg).unwrap();
    }
    let mut files = 0;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            std::fs::read(a.path().join(&name)).unwrap(),
            std::fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
        files += 1;
    }
    // two comparisons, the summary and three path dumps
    assert_eq!(files, 6);
    let dump = read_rows(&a.path().join("paths_lmm-exact.csv"));
    assert_eq!(dump.len(), 3 * 10 * 10);
}

#[test]
fn corrected_schemes_beat_frozen_on_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("figure1.toml", dir.path(), 20_000);
    run_compare(&cfg).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let max_abs = |s: &str| -> f64 {
        summary
            .lines()
            .find(|l| l.starts_with(s))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(max_abs("lmm-taylor") < max_abs("lmm-frozen"));
    assert!(max_abs("lmm-picard1") < max_abs("lmm-frozen"));
}

#[test]
fn price_writes_every_model() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("affine.toml", dir.path(), 10_000);
    cfg.vols.flat = Some(0.2);
    cfg.models.list = libor_lab::ModelKind::ALL.to_vec();
    run_price(&cfg).unwrap();
    let rows = read_rows(&dir.path().join("quotes.csv"));
    let labels: std::collections::BTreeSet<(String, String)> = rows
        .iter()
        .map(|r| (r[0].to_string(), r[1].to_string()))
        .collect();
    for (m, s) in [
        ("lmm", "exact"),
        ("lmm", "frozen"),
        ("lmm", "picard1"),
        ("lmm", "taylor"),
        ("fpm", "mc"),
        ("fpm", "fourier"),
        ("affine", "mc"),
        ("affine", "fourier"),
        ("mfm", "functional"),
    ] {
        assert!(labels.contains(&(m.to_string(), s.to_string())), "{m} {s}");
    }
    // the Markov-functional model reprices Black caplets at the input vol
    for r in rows.iter().filter(|r| &r[0] == "mfm") {
        let iv: f64 = r[6].parse().unwrap();
        assert!((iv - 0.2).abs() < 1e-6, "{r:?}");
    }
    let u = read_rows(&dir.path().join("affine_u.csv"));
    assert_eq!(u.len(), 10);
    assert_eq!(&u[9][1], "0");
}

#[test]
fn verify_reports_the_expected_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "lmm_jump.toml",
            [Status::Pass, Status::Pass, Status::Witness],
        ),
        (
            "fpm_high_vol.toml",
            [Status::Witness, Status::Pass, Status::Pass],
        ),
        ("mfm.toml", [Status::Pass, Status::Pass, Status::Pass]),
        ("affine.toml", [Status::Pass, Status::Pass, Status::Pass]),
    ];
    for (name, expected) in cases {
        let cfg = small(name, dir.path(), 10_000);
        let got: Vec<Status> = verify_checks(&cfg)
            .unwrap()
            .iter()
            .map(|c| c.status)
            .collect();
        assert_eq!(got, expected, "{name}");
    }
}

#[test]
fn calibration_writes_the_functionals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("mfm.toml", dir.path(), 2);
    let out = run_calibrate_mfm(&cfg).unwrap();
    assert!(!out.failed);
    let rows = read_rows(&dir.path().join("mfm_grid.csv"));
    // T_0 is a single node, every later date uses the full grid
    assert_eq!(rows.len(), 1 + 9 * 401);
}

#[test]
fn invariant_failures_exit_with_one() {
    let out = Outcome {
        failed: true,
        ..Outcome::default()
    };
    assert_eq!(out.exit_code(), 1);
    assert_eq!(Outcome::default().exit_code(), 0);
    assert_eq!(LabError::Config("x".into()).exit_code(), 2);
}
