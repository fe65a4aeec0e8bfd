use std::path::Path;

use circsym::harness::{self, read_csv, ExperimentConfig, ExperimentId, Grid, Method, ResultRow};
use circsym::{ChannelKind, NoiseSpec};

fn fixture() -> Vec<ResultRow> {
    read_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/table1.csv")).unwrap()
}

/// Purity of |0⟩ after independent bit flips with the given probabilities.
fn flip_purity(flips: &[f64]) -> f64 {
    let q = (1.0 - flips.iter().map(|p| 1.0 - 2.0 * p).product::<f64>()) / 2.0;
    1.0 - 2.0 * q * (1.0 - q)
}

fn check_rows(rows: &[ResultRow]) {
    for r in rows {
        assert!((0.0..=1.0 + 1e-12).contains(&r.purity), "{r:?}");
        assert!(r.p_pass > 0.0 && r.p_pass <= 1.0 + 1e-12, "{r:?}");
        assert!((r.sof - (1.0 / r.p_pass - 1.0)).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn table1_matches_golden_fixture() {
    let rows = harness::table1().unwrap();
    let golden = fixture();
    assert_eq!(rows.len(), 14);
    assert_eq!(rows.len(), golden.len());
    for (r, g) in rows.iter().zip(&golden) {
        assert_eq!((r.method, r.n_gates, r.eps2), (g.method, g.n_gates, g.eps2));
        assert!((r.purity - g.purity).abs() < 1e-9, "{r:?} vs {g:?}");
        assert!((r.p_pass - g.p_pass).abs() < 1e-9, "{r:?} vs {g:?}");
    }
    check_rows(&rows);
}

#[test]
fn table1_closed_forms() {
    let eps1 = harness::TABLE1_EPS1;
    for r in harness::table1().unwrap() {
        let n = r.n_gates.unwrap();
        let mut flips = vec![eps1; n];
        let expect = match r.method {
            Method::Unprotected => flip_purity(&flips),
            Method::Sts => {
                flips.extend([r.eps2 / 2.0; 3]);
                assert!((r.p_pass - (1.0 - eps1)).abs() < 1e-12);
                flip_purity(&flips)
            }
            _ => continue,
        };
        assert!((r.purity - expect).abs() < 1e-12, "{r:?}: {expect}");
    }
}

#[test]
fn table1_cells_do_not_depend_on_angle() {
    let mut cfg = ExperimentConfig::preset(ExperimentId::RotSweep);
    cfg.noise = NoiseSpec::new(ChannelKind::BitFlip, 0.001, 0.01).unwrap();
    cfg.grid = Grid {
        angles: vec![0.1, 0.9, 2.3],
        gates: vec![2, 10],
        ratios: vec![10.0],
        ..Grid::default()
    };
    let rows = harness::run(&cfg).unwrap();
    check_rows(&rows);
    for r in &rows {
        let first = rows
            .iter()
            .find(|o| o.method == r.method && o.n_gates == r.n_gates)
            .unwrap();
        // switch controls pick up a weak angle dependence through flipped controls
        let tol = match r.method {
            Method::Unprotected | Method::Sts | Method::StsErrorfreeCheck => 1e-12,
            _ => 1e-4,
        };
        assert!((r.purity - first.purity).abs() < tol, "{r:?}");
    }
}

#[test]
fn rot_sweep_without_noise_is_ideal() {
    let mut cfg = ExperimentConfig::preset(ExperimentId::RotSweep);
    cfg.noise = NoiseSpec::noiseless();
    cfg.grid.ratios = vec![2.0];
    let rows = harness::run(&cfg).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!((r.purity - 1.0).abs() < 1e-10, "{r:?}");
        assert!(r.sof.abs() < 1e-10, "{r:?}");
    }
    // every applicable method appears for both chain lengths
    let methods = |g: usize| {
        let mut m: Vec<Method> = rows.iter().filter(|r| r.n_gates == Some(g)).map(|r| r.method).collect();
        m.sort();
        m.dedup();
        m
    };
    assert_eq!(methods(2), [Method::Unprotected, Method::QsOriginal, Method::Sts, Method::StsErrorfreeCheck]);
    assert_eq!(
        methods(10),
        [Method::Unprotected, Method::QsType1, Method::QsType2, Method::Sts, Method::StsErrorfreeCheck]
    );
}

#[test]
fn qaoa_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentId::Qaoa1Sweep);
    cfg.grid.qubits = vec![3];
    cfg.seed = 11;
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        cfg.output_path = Some(dir.path().join(name));
        let rows = harness::run(&cfg).unwrap();
        check_rows(&rows);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.instances == 100));
        outputs.push(std::fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    cfg.seed = 12;
    cfg.output_path = None;
    let other = harness::csv_string(&harness::run(&cfg).unwrap()).unwrap();
    assert_ne!(other.as_bytes(), &outputs[0][..]);
}

#[test]
fn purity_falls_with_error_rate() {
    let mut cfg = ExperimentConfig::preset(ExperimentId::QftSweep);
    cfg.noise = NoiseSpec::new(ChannelKind::Depolarizing, 0.0003, 0.003).unwrap();
    cfg.grid.qubits = vec![2, 3];
    cfg.grid.eps2 = vec![0.001, 0.003, 0.01, 0.03];
    let rows = harness::run(&cfg).unwrap();
    check_rows(&rows);
    for n in [2, 3] {
        for m in [Method::Unprotected, Method::Sts, Method::StsErrorfreeCheck] {
            let series: Vec<&ResultRow> = rows.iter().filter(|r| r.n_qubits == Some(n) && r.method == m).collect();
            assert_eq!(series.len(), 4);
            for w in series.windows(2) {
                assert!(w[0].eps2 < w[1].eps2);
                assert!((w[1].eps1 / w[1].eps2 - 0.1).abs() < 1e-12);
                assert!(w[1].purity <= w[0].purity + 1e-12, "{m} n={n}");
                assert!(w[1].sof >= w[0].sof - 1e-12, "{m} n={n}");
            }
        }
    }
}

#[test]
fn multistage_rows_cover_grid() {
    let mut cfg = ExperimentConfig::preset(ExperimentId::QaoaMultistage);
    cfg.instances = 3;
    cfg.grid.qubits = vec![2, 3];
    cfg.grid.stages = vec![1, 2];
    let rows = harness::run(&cfg).unwrap();
    check_rows(&rows);
    // four methods for even widths, three for odd
    assert_eq!(rows.len(), 2 * 4 + 2 * 3);
    assert!(rows.iter().all(|r| r.stages.is_some() && r.n_qubits.is_some()));
}

#[test]
fn method_filter_and_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut cfg = ExperimentConfig::preset(ExperimentId::Table1);
    cfg.methods = Some(vec![Method::Sts]);
    cfg.output_path = Some(path.clone());
    let rows = harness::run(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(read_csv(&path).unwrap(), rows);
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("experiment,noise,n_qubits,n_gates,stages,angle,eps1,eps2,method,instances,purity,p_pass,sof\n"));
}

#[test]
fn unwritable_output_is_an_error() {
    let mut cfg = ExperimentConfig::preset(ExperimentId::Table1);
    cfg.methods = Some(vec![Method::Unprotected]);
    cfg.output_path = Some("/nonexistent-dir/x/out.csv".into());
    assert!(harness::run(&cfg).is_err());
}
