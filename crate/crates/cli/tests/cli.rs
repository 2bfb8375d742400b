use std::path::Path;
use std::process::{Command, Output};

use poro_hdg_cli::config::Config;
use poro_hdg_cli::{mtx, presets, run, vtk};

fn poro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poro-hdg")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_simulation(out: &Path, tfinal: &str) -> Output {
    poro(&[
        "--scenario", "example1-compressible", "--mode", "simulate", "--set", "mesh.nx=4", "--set", "mesh.ny=4",
        "--dt", "0.05", "--tfinal", tfinal, "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&poro(&[])), 2);
    assert_eq!(code(&poro(&["--config", "a.cfg", "--scenario", "example1-compressible"])), 2);
    assert_eq!(code(&poro(&["--frobnicate"])), 2);
    let o = poro(&["--scenario", "example7"]);
    assert_eq!(code(&o), 2);
    for name in presets::names() {
        assert!(stderr(&o).contains(name), "{}", stderr(&o));
    }
    let o = poro(&["--scenario", "example1-compressible", "--set", "mesh.spacing=3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mesh.spacing: unknown key"));
    assert_eq!(code(&poro(&["--scenario", "example1-compressible", "--levels", "0"])), 2);
    assert_eq!(code(&poro(&["--config", "/nonexistent/poro.cfg"])), 2);
}

#[test]
fn help_and_listing_succeed() {
    let o = poro(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("--scenario"));
    let o = poro(&["--list-scenarios"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), presets::names());
}

#[test]
fn printed_config_reproduces_the_preset() {
    for name in presets::names() {
        let o = poro(&["--scenario", name, "--print-config"]);
        assert_eq!(code(&o), 0);
        assert_eq!(Config::parse(&stdout(&o)).unwrap(), presets::scenario(name).unwrap(), "{name}");
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, presets::text("example2-isotropic").unwrap()).unwrap();
    let o = poro(&["--config", path.to_str().unwrap(), "--degree", "2", "--dt", "1e-6", "--print-config"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = Config::parse(&stdout(&o)).unwrap();
    assert_eq!((cfg.degree, cfg.time.dt), (2, 1e-6));
}

#[test]
fn oracle_check_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = poro(&[
        "--scenario", "example1-compressible", "--mode", "oracle-check", "--set", "mesh.nx=3", "--set", "mesh.ny=3",
        "--degree", "2", "--emit-matrix", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max relative difference"));
    let text = std::fs::read_to_string(dir.path().join("trace_matrix.mtx")).unwrap();
    let (rows, cols, entries) = mtx::read(&text).unwrap();
    assert_eq!(rows, cols);
    assert!(entries.iter().all(|e| e.0 < rows && e.1 < cols && e.2.is_finite()));
}

#[test]
fn convergence_mode_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = poro(&["--scenario", "example1-compressible", "--levels", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("err(sigma)") && out.contains("2^-2") && out.contains("fitted slopes"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn simulation_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = small_simulation(d.path(), "0.3");
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["diagnostics.csv", "snapshot_0000.vtk", "snapshot_0006.vtk"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let diag = std::fs::read_to_string(a.path().join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 8);
    assert!(!a.path().join("snapshot_0007.vtk").exists());
}

#[test]
fn zero_steps_write_only_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_simulation(dir.path(), "0");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["config.txt", "diagnostics.csv", "snapshot_0000.vtk"]);
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 2);
    let grid = vtk::read(&std::fs::read_to_string(dir.path().join("snapshot_0000.vtk")).unwrap()).unwrap();
    assert_eq!(grid.cells.len(), 32);
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = small_simulation(&blocker.join("sub"), "0.1");
    assert_eq!(code(&o), 1);
}

#[test]
fn example1_simulation_regression() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets::scenario("example1-compressible").unwrap();
    let s = run::simulate(&cfg, dir.path(), false).unwrap();
    assert_eq!((s.elements, s.trace_unknowns, s.steps), (128, 1056, 25));
    assert!(s.all_finite);
    let want = [3.181691225e-2, 5.869175414e-3, 1.322235745e-2, 5.932899546e-3];
    let got = s.errors.unwrap();
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-8 * w, "{got:?}");
    }
    let last = s.diagnostics.last().unwrap();
    assert!((last.t - 1.0).abs() < 1e-12);
    assert_eq!(s.snapshots.len(), 11);
}
