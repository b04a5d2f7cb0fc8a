use std::fs;

use rbftune::bench::{plan, read_table, run_bench, write_table, BenchConfig, BenchRow, PointKind};
use rbftune::pipeline::{Method, TuneParams};
use rbftune_core::data::TestFunction;
use rbftune_core::kernels::KernelFamily;

fn tiny() -> BenchConfig {
    BenchConfig {
        sizes: vec![20, 30],
        xis: vec![0.1, 0.001],
        fractions: vec![0.5, 1.0],
        test_size: 100,
        seed: 3,
        params: TuneParams {
            grid_size: 20,
            nstart: 3,
            niter: 3,
            acquisition_candidates: 100,
            ..TuneParams::default()
        },
        ..BenchConfig::default()
    }
}

#[test]
fn writes_the_full_inventory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny();
    let out = run_bench(&cfg, dir.path(), |_| {}).unwrap();
    assert_eq!(out.csv_files.len(), 9);
    let tables = plan(&cfg);
    for (path, table) in out.csv_files.iter().zip(&tables) {
        let rows = read_table(fs::File::open(path).unwrap()).unwrap();
        assert_eq!(rows.len(), table.len(), "{}", path.display());
        assert!(rows.iter().all(|r| r.time_s.is_none() && r.mae >= 0.0));
    }
    // |sizes| × (loocv + loocv* + |xis| bo rows) × 2 kernels
    assert_eq!(tables[0].len(), 2 * 4 * 2);
    let md = fs::read_to_string(&out.markdown).unwrap();
    assert!(md.contains("## interp_f1_random_m2-ga"));
    assert!(md.contains("## sweep_w2_f1"));
}

#[test]
fn parallel_and_serial_runs_agree_byte_for_byte() {
    let cfg = BenchConfig {
        kernels: vec![KernelFamily::Matern2],
        functions: vec![TestFunction::F2],
        point_kinds: vec![PointKind::Random],
        ..tiny()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run_bench(&cfg, a.path(), |_| {}).unwrap();
    let ob = run_bench(&BenchConfig { jobs: 3, ..cfg }, b.path(), |_| {}).unwrap();
    assert_eq!(oa.csv_files.len(), ob.csv_files.len());
    for (x, y) in oa.csv_files.iter().zip(&ob.csv_files) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn rows_round_trip_through_csv() {
    let rows = vec![
        BenchRow {
            function: TestFunction::F1,
            points: PointKind::Halton,
            kernel: KernelFamily::Gaussian,
            n: 1000,
            method: Method::LoocvStar,
            xi: None,
            centers_pct: None,
            time_s: Some(0.123456789),
            mae: 1.2345678901234567e-5,
            epsilon_star: 6.44,
        },
        BenchRow {
            function: TestFunction::F2,
            points: PointKind::Random,
            kernel: KernelFamily::Wendland2,
            n: 250,
            method: Method::Bo,
            xi: Some(0.001),
            centers_pct: Some(20.0),
            time_s: None,
            mae: 0.1,
            epsilon_star: 0.30000000000000004,
        },
    ];
    let mut buf = Vec::new();
    write_table(&mut buf, &rows, true).unwrap();
    assert_eq!(read_table(buf.as_slice()).unwrap(), rows);
}

#[test]
fn invalid_configs_are_refused_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BenchConfig {
        sizes: vec![9],
        ..tiny()
    };
    assert!(run_bench(&cfg, dir.path(), |_| {}).is_err());
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}
