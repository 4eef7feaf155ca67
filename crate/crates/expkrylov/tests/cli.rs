use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Barrier};
use std::thread;

use expkrylov::bench::BENCH_COLUMNS;
use expkrylov::cache::SharedDirectSolver;
use expkrylov::cli::ConfigArgs;
use expkrylov::config::RunConfig;
use expkrylov_core::integrators::BUILTIN_TABLEAUS;
use expkrylov_core::linalg::vector;
use expkrylov_core::problems::Problem;
use expkrylov_core::solvers::{DirectSolver, Ordering, ShiftedSolver, ShiftedSystemKey};
use expkrylov_core::C64;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expkrylov")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn poles_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/poles")
}

fn summary_value(report: &str, key: &str) -> String {
    let table: toml::Table = report.parse().unwrap();
    table["summary"][key].to_string()
}

#[test]
fn run_writes_one_row_per_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--nx", "32", "--integrator", "sw2", "--h", "0.1", "--T", "1", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 11);
    for l in &lines {
        assert_eq!(l.split(',').count(), 32 * 32 + 1);
    }
    assert!(lines[0].starts_with("t,u0,u1,"));
    let report = fs::read_to_string(dir.path().join("out/report.toml")).unwrap();
    assert_eq!(summary_value(&report, "n"), "1024");
    assert_eq!(summary_value(&report, "all_converged"), "true");
}

#[test]
fn snapshot_stride_thins_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--nx", "8", "--h", "0.1", "--T", "1", "--snapshots", "5", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/trajectory.csv")).unwrap();
    let times: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(times.len(), 3);
    assert!((times[2] - 1.0).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--problem", "gm2d", "--nx", "12", "--integrator", "etd3rk", "--h", "0.01", "--T", "0.05", "--seed", "4"];
    let mut sums = Vec::new();
    for out in ["a", "b"] {
        let mut a = args.to_vec();
        a.extend(["--out", out]);
        let o = bin(&a, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let report = fs::read_to_string(dir.path().join(out).join("report.toml")).unwrap();
        sums.push(summary_value(&report, "final_state_checksum"));
    }
    assert_eq!(sums[0], sums[1]);
    let o = bin(&["run", "--config", "a/report.toml", "--out", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("c/report.toml")).unwrap();
    assert_eq!(summary_value(&report, "final_state_checksum"), sums[0]);

    let o = bin(&["run", "--problem", "gm2d", "--nx", "12", "--integrator", "etd3rk", "--h", "0.01", "--T", "0.05", "--seed", "5", "--out", "d"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("d/report.toml")).unwrap();
    assert_ne!(summary_value(&report, "final_state_checksum"), sums[0]);
}

#[test]
fn misspelled_integrator_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--integrator", "krogstad"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["expeuler", "sw2", "etd3rk", "krogstad4"] {
        assert!(err.contains(name), "{err}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--h", "-1"],
        vec!["run", "--engine", "chebyshev"],
        vec!["run", "--poles", "missing.poles"],
        vec!["run", "--config", "missing.toml"],
        vec!["run", "--repeated-pole", "0"],
        vec!["run", "--m-min", "20", "--m-max", "10"],
    ] {
        let o = bin(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    fs::write(dir.path().join("bad.toml"), "nx = 16\nintegrater = \"sw2\"\n").unwrap();
    let o = bin(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("integrater"));
}

#[test]
fn numeric_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let poles = poles_dir().join("rhp16.poles");
    let o = bin(
        &[
            "run",
            "--nx",
            "16",
            "--poles",
            poles.to_str().unwrap(),
            "--solver",
            "iterative",
            "--solver-tol",
            "1e-14",
            "--solver-max-iter",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no convergence"));
}

#[test]
fn iterative_solver_rejects_left_half_plane_poles() {
    let dir = tempfile::tempdir().unwrap();
    let poles = poles_dir().join("cf12.poles");
    let o = bin(&["run", "--nx", "8", "--poles", poles.to_str().unwrap(), "--solver", "iterative"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--solver direct"));
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.toml");
    fs::write(&file, "nx = 16\nintegrator = \"etd3rk\"\ntol = 1e-6\n").unwrap();
    let args = ConfigArgs { config: Some(file.clone()), nx: Some(12), ..ConfigArgs::default() };
    let cfg = args.resolve().unwrap();
    assert_eq!(cfg.nx, 12);
    assert_eq!(cfg.integrator, "etd3rk");
    assert_eq!(cfg.tol, 1e-6);
    assert_eq!(cfg.h, RunConfig::default().h);

    let args = ConfigArgs { config: Some(file), repeated_pole: Some(2.0), ..ConfigArgs::default() };
    assert_eq!(args.resolve().unwrap().repeated_pole, Some(2.0));

    let o = bin(&["run", "--config", "c.toml", "--nx", "10", "--T", "0.1", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("o/report.toml")).unwrap();
    let cfg = RunConfig::from_toml(&report).unwrap();
    assert_eq!((cfg.nx, cfg.integrator.as_str(), cfg.tol, cfg.t_end), (10, "etd3rk", 1e-6, 0.1));
}

#[test]
fn pole_file_flag_replaces_repeated_pole_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.toml");
    fs::write(&file, "repeated_pole = 3.0\n").unwrap();
    let poles = poles_dir().join("cf12.poles");
    let args = ConfigArgs { config: Some(file), poles: Some(poles.clone()), ..ConfigArgs::default() };
    let cfg = args.resolve().unwrap();
    assert_eq!(cfg.poles, Some(poles));
    assert_eq!(cfg.repeated_pole, None);
    cfg.validate().unwrap();
}

#[test]
fn bench_writes_stable_columns_and_records_cell_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["bench", "--sizes", "8,12", "--engines", "rational,polynomial", "--T", "0.1", "--csv", "b.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], BENCH_COLUMNS.join(","));
    assert_eq!(lines.len(), 1 + 4);
    let mut rdr = csv::Reader::from_path(dir.path().join("b.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][1], "8");
    assert_eq!(&rows[0][3], "rational");
    assert_eq!(&rows[1][3], "polynomial");
    assert_eq!(&rows[3][2], "144");
    assert!(rows.iter().all(|r| r[17].is_empty()));

    let o = bin(&["bench", "--sizes", "8", "--engines", "rational,magic", "--T", "0.1", "--csv", "c.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let mut rdr = csv::Reader::from_path(dir.path().join("c.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][17].is_empty());
    assert!(rows[1][17].contains("magic"));
    let again = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(again.lines().next(), first.lines().next());
}

#[test]
fn verify_passes_on_a_clean_tree() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["dense expm", "phi identity", "error expansion", "estimator effectivity", "etd3rk stage-2", "linear exactness"] {
        assert!(out.contains(name), "{out}");
    }
}

#[test]
fn corrupted_tableau_fails_the_stage_two_check() {
    let dir = tempfile::tempdir().unwrap();
    let (head, tail) = BUILTIN_TABLEAUS.split_once("method etd3rk").unwrap();
    let corrupted = format!("{head}method etd3rk{}", tail.replacen("stage 2 1 1 1/2", "stage 2 1 1 1/3", 1));
    assert_ne!(corrupted, BUILTIN_TABLEAUS);
    fs::write(dir.path().join("tab.txt"), corrupted).unwrap();
    let o = bin(&["verify", "--tableaus", "tab.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let failed = out.lines().find(|l| l.starts_with("failed:")).unwrap();
    assert!(failed.contains("etd3rk stage-2"), "{out}");

    fs::write(dir.path().join("junk.txt"), "not a tableau file\n").unwrap();
    let o = bin(&["verify", "--tableaus", "junk.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l.starts_with("etd3rk stage-2") && l.contains("FAIL")));
}

#[test]
fn missing_fixture_gives_actionable_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "--fixtures", "nowhere"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("nowhere/cf12.poles"), "{out}");
    assert!(out.contains("EXPKRYLOV_FIXTURES"), "{out}");
}

#[test]
fn poles_validate_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cf = poles_dir().join("cf12.poles");
    let o = bin(&["poles", "validate", cf.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("12 poles"));
    assert!(out.contains("needs the direct solver"));

    fs::write(dir.path().join("near.poles"), "# kind=repeated-real\n-5 0\n").unwrap();
    let o = bin(&["poles", "validate", "near.poles", "--lambda-max", "100", "--h", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("warning"));

    fs::write(dir.path().join("bad.poles"), "# kind=complex\n1 2\n").unwrap();
    let o = bin(&["poles", "validate", "bad.poles"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_info_summarizes_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "0 1\n1 2\n3 4\n").unwrap();
    let o = bin(&["graph", "info", "g.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("nodes 5"));
    assert!(out.contains("components 2"));
    let o = bin(&["graph", "info", "missing.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_file_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = String::new();
    for i in 1..=30 {
        edges.push_str(&format!("{} {}\n", i, i % 30 + 1));
    }
    fs::write(dir.path().join("ring.txt"), edges).unwrap();
    let o = bin(
        &["run", "--problem", "graph-ac", "--graph-file", "ring.txt", "--one-based", "--h", "0.05", "--T", "0.2", "--out", "o"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("o/report.toml")).unwrap();
    assert_eq!(summary_value(&report, "n"), "30");
}

#[test]
fn shared_cache_factorizes_each_key_once_across_threads() {
    let p = Problem::allen_cahn_default(24).unwrap();
    let a = Arc::new(p.operator);
    let shared = SharedDirectSolver::new(Ordering::default());
    let keys = [C64::new(1.0, 2.0), C64::new(1.0, -2.0), C64::new(3.0, 0.0)];
    let barrier = Arc::new(Barrier::new(4));
    let handles: Vec<_> = (0..4)
        .map(|t| {
            let (a, mut solver, barrier) = (a.clone(), shared.clone(), barrier.clone());
            thread::spawn(move || {
                barrier.wait();
                let rhs: Vec<C64> = (0..a.n()).map(|i| C64::new((i + t) as f64 % 7.0, 1.0)).collect();
                keys.iter()
                    .map(|&pole| {
                        let key = ShiftedSystemKey::new(pole, 0.1, &a);
                        (pole, rhs.clone(), solver.solve(&a, &key, &rhs).unwrap().x)
                    })
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let results: Vec<_> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
    assert_eq!(shared.numeric_factorizations(), 2);
    assert_eq!(shared.symbolic_analyses(), 1);
    assert_eq!(shared.cached(), 2);
    let mut reference = DirectSolver::default();
    for (pole, rhs, x) in results {
        let want = reference.solve(&a, &ShiftedSystemKey::new(pole, 0.1, &a), &rhs).unwrap().x;
        assert!(vector::norm2(&vector::sub(&x, &want)) <= 1e-12 * vector::norm2(&want));
    }
}
