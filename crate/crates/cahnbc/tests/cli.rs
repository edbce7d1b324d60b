use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cahnbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cahnbc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &TempDir, body: &str) -> PathBuf {
    let p = dir.path().join("base.toml");
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"
[grid]
nx = 12
ny = 12
[data]
seed = 3
u0 = { kind = "random-smooth", mean = 0.1, amplitude = 0.4 }
[time]
dt = 0.01
t_end = 0.025
"#;

const KAPPA: &str = r#"
[grid]
nx = 16
ny = 16
lx = 12.566370614359172
ly = 12.566370614359172
[data]
seed = 7
u0 = { kind = "random-smooth", mean = 0.1, amplitude = 0.5 }
[time]
dt = 0.01
t_end = 0.5
"#;

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let j = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn steady_run_keeps_mass_and_writes_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"
        [grid]
        nx = 10
        ny = 8
        [potentials]
        pi = { slope = 0.0 }
        pi_gamma = { slope = 0.0 }
        [data]
        u0 = { kind = "constant", value = 0.0 }
        [time]
        dt = 0.01
        t_end = 0.025
        [output]
        snapshot_every = 1
        "#,
    );
    let out = dir.path().join("out");
    let o = cahnbc(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    // ceil(0.025/0.01) + 1 rows below the header
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.starts_with("t,mass,energy,"));
    let mass = csv_column(&csv, "mass");
    assert!(mass.iter().all(|&m| m == mass[0]));
    let snaps: Vec<_> = fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 4);
    let first = fs::read_to_string(out.join("snapshots/u_000003.field")).unwrap();
    assert!(first.starts_with("10 8 1.000000000000e+00 1.000000000000e+00 3.000000000000e-02\n"));
    assert!(out.join("resolved.toml").exists());
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&cahnbc(&["run", "--config", s(&cfg), "--out", s(out)])), 0);
    }
    let (x, y) = (fs::read(a.join("diagnostics.csv")).unwrap(), fs::read(b.join("diagnostics.csv")).unwrap());
    assert_eq!(x, y);
}

#[test]
fn snapshot_feeds_back_as_initial_data() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let out = dir.path().join("first");
    assert_eq!(code(&cahnbc(&["run", "--config", s(&cfg), "--out", s(&out)])), 0);
    let body = SMALL.replace(
        r#"u0 = { kind = "random-smooth", mean = 0.1, amplitude = 0.4 }"#,
        r#"u0 = { kind = "file", path = "first/snapshots/u_000000.field" }"#,
    );
    let cfg2 = dir.path().join("again.toml");
    fs::write(&cfg2, body).unwrap();
    let out2 = dir.path().join("second");
    let o = cahnbc(&["run", "--config", s(&cfg2), "--out", s(&out2)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m1 = csv_column(&fs::read_to_string(out.join("diagnostics.csv")).unwrap(), "mass");
    let m2 = csv_column(&fs::read_to_string(out2.join("diagnostics.csv")).unwrap(), "mass");
    assert!((m1[0] - m2[0]).abs() < 1e-12);
}

#[test]
fn kappa_sweep_passes_and_is_thread_independent() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, KAPPA);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let list = "1,0.5,0.25,0.125,0.0625,0";
    let o = cahnbc(&["sweep-kappa", "--config", s(&cfg), "--kappas", list, "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = cahnbc(&["--threads", "1", "sweep-kappa", "--config", s(&cfg), "--kappas", list, "--out", s(&b)]);
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read_to_string(b.join("summary.csv")).unwrap());
    let d = csv_column(&summary, "d_to_ref");
    assert_eq!(d.len(), 6);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    for k in ["1", "0.5", "0.0625", "0"] {
        let csv = fs::read_to_string(a.join(format!("kappa_{k}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 1 + 51);
    }
}

#[test]
fn slow_kappa_decay_is_an_acceptance_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, KAPPA);
    let out = dir.path().join("o");
    let o = cahnbc(&["sweep-kappa", "--config", s(&cfg), "--kappas", "1,0.75,0.5", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(out.join("summary.csv").exists());
}

#[test]
fn bad_sweep_lists_are_configuration_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let o = cahnbc(&["sweep-epsilon", "--config", s(&cfg), "--epsilons", "0.1,0.2,0.01"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("strictly decreasing"));
    let o = cahnbc(&["sweep-kappa", "--config", s(&cfg), "--kappas", "abc"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn epsilon_sweep_writes_one_file_per_value() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    let out = dir.path().join("eps");
    let o = cahnbc(&["sweep-epsilon", "--config", s(&cfg), "--epsilons", "0.1,0.01,0.001", "--out", s(&out)]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    for e in ["0.1", "0.01", "0.001"] {
        assert!(out.join(format!("eps_{e}.csv")).exists());
    }
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 4);
}

#[test]
fn dominated_pair_failure_reports_its_location() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"
        [potentials]
        bulk = { kind = "cubic", params = [2.0] }
        boundary = { kind = "cubic", params = [1.0] }
        same_growth = false
        "#,
    );
    let o = cahnbc(&["verify-graphs", "--config", s(&cfg)]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("domination violated at r = "), "{err}");
}

#[test]
fn admissible_pair_verifies() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"
        [potentials]
        bulk = { kind = "logarithmic" }
        boundary = { kind = "logarithmic" }
        pi = { slope = -4.0 }
        pi_gamma = { slope = -4.0 }
        "#,
    );
    let o = cahnbc(&["verify-graphs", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("domination"));
}

#[test]
fn invalid_configurations_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[physics]\nkappa = 1.5\n");
    let o = cahnbc(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("kappa = 1.5"));

    let cfg = write_config(
        &dir,
        r#"
        [potentials]
        bulk = { kind = "obstacle" }
        boundary = { kind = "obstacle" }
        [data]
        u0 = { kind = "constant", value = 1.0 }
        "#,
    );
    let o = cahnbc(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("A4"), "{}", stderr(&o));

    let cfg = write_config(&dir, "[grid\n");
    assert_eq!(code(&cahnbc(&["run", "--config", s(&cfg)])), 1);
}

#[test]
fn missing_files_are_io_errors() {
    let o = cahnbc(&["run", "--config", "/nonexistent/base.toml"]);
    assert_eq!(code(&o), 4);
    let o = cahnbc(&["plot", "/nonexistent/summary.csv"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn newton_failure_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"
        [grid]
        nx = 8
        ny = 8
        [potentials]
        bulk = { kind = "logarithmic" }
        boundary = { kind = "logarithmic" }
        [data]
        u0 = { kind = "random-smooth", mean = 0.0, amplitude = 0.95 }
        [time]
        dt = 0.5
        t_end = 1.0
        [solver]
        newton_max_iter = 1
        newton_tol = 1e-14
        "#,
    );
    let out = dir.path().join("o");
    let o = cahnbc(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn contdep_reports_each_magnitude() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, SMALL);
    for target in ["u0", "g"] {
        let out = dir.path().join(target);
        let o = cahnbc(&["contdep", "--config", s(&cfg), "--target", target, "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let csv = fs::read_to_string(out.join("contdep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv_ratio_finite(&csv));
    }
}

fn csv_ratio_finite(csv: &str) -> bool {
    csv.lines().skip(1).all(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap().is_finite())
}

#[test]
fn plots_are_svg() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, KAPPA);
    let out = dir.path().join("k");
    assert_eq!(code(&cahnbc(&["sweep-kappa", "--config", s(&cfg), "--out", s(&out)])), 0);
    let o = cahnbc(&["plot", s(&out.join("summary.csv"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = fs::read_to_string(out.join("summary.svg")).unwrap();
    assert!(svg.contains("<svg"));
    let figs = dir.path().join("figs");
    let o = cahnbc(&["plot", s(&out.join("kappa_1.csv")), "--out", s(&figs)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(figs.join("kappa_1.svg").exists());
}

#[test]
fn manufactured_writes_its_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m");
    let o = cahnbc(&["manufactured", "--sizes", "8,16", "--dts", "0.2,0.1", "--n-time", "16", "--out", s(&out)]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("manufactured.csv")).unwrap();
    assert!(csv.starts_with("h,dt,err_H,err_V,order_space,order_time\n"));
    assert_eq!(csv.lines().count(), 5);
    let order = csv_column(&csv, "order_space")[0];
    assert!((order - 2.0).abs() < 0.3, "{order}");
}
