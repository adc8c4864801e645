use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, cmd: &str, config: &str, out: &str, extra: &[&str]) -> Output {
        let cfg = self.file("run.conf", config);
        self.exec_path(cmd, &cfg, out, extra)
    }

    fn exec_path(&self, cmd: &str, cfg: &Path, out: &str, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_thinshell"))
            .arg(cmd)
            .arg("--config")
            .arg(cfg)
            .arg("--out")
            .arg(self.out(out))
            .args(extra)
            .output()
            .unwrap()
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn row<'a>(report: &'a str, id: &str) -> Vec<&'a str> {
    report
        .lines()
        .find(|l| l.starts_with(&format!("{id},")))
        .unwrap_or_else(|| panic!("no row {id} in\n{report}"))
        .split(',')
        .collect()
}

#[test]
fn malformed_config_exits_2() {
    let r = Run::new();
    let o = r.exec("check-identities", "identities.n 8\n", "o", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.conf:1"));
    let o = r.exec("check-identities", "identities.m = 8\n", "o", &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = r.exec_path("korn", &r.out("absent.conf"), "o", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coarse_identity_run_skips_orders() {
    let r = Run::new();
    let o = r.exec("check-identities", "identities.n = 8\n", "o", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
    let report = read(&r.out("o/report.csv"));
    assert_eq!(row(&report, "sphere:1/gauss_formula/order")[4], "skipped");
    assert_eq!(row(&report, "torus:3:1/projector_idempotent")[4], "pass");
    assert_eq!(row(&report, "sphere:1/impermeability")[4], "pass");
}

#[test]
fn identity_orders_at_moderate_resolution() {
    let r = Run::new();
    let o = r.exec("check-identities", "identities.n = 32\nidentities.surfaces = sphere:1\n", "o", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read(&r.out("o/report.csv"));
    let order: f64 = row(&report, "sphere:1/limit_equation/order")[1].parse().unwrap();
    assert!(order >= 3.0);
    assert_eq!(read(&r.out("o/orders.csv")).lines().count(), 1 + 4 * 3);
}

#[test]
fn single_epsilon_is_a_config_error() {
    let r = Run::new();
    let o = r.exec("rate-study", "rate.eps = 0.1\n", "o", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid epsilon list"));
}

#[test]
fn rate_study_writes_slope() {
    let r = Run::new();
    let o = r.exec("rate-study", "grid.n = 32\nrate.estimates = comp_n, extan_div\n", "o", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = read(&r.out("o/rate_comp_n.csv"));
    assert!(csv.starts_with("epsilon,quantity,reference_norm\n"));
    let slope: f64 = csv.lines().last().unwrap().trim_start_matches("# slope = ").parse().unwrap();
    assert!((slope - 2.0).abs() < 0.2);
}

const KILLING: &str = "grid.n = 16\nsolve.v0 = killing:0,0,1\nsolve.t_final = 0.05\nsolve.output_every = 10\n";

#[test]
fn killing_solve_is_steady_and_reproducible() {
    let r = Run::new();
    let a = r.exec("solve", KILLING, "a", &[]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    let report = read(&r.out("a/report.csv"));
    assert_eq!(row(&report, "killing_energy_drift")[4], "pass");
    for f in ["energy.svg", "speed.svg", "velocity.csv", "pressure.csv", "diagnostics.csv"] {
        assert!(r.out("a").join(f).is_file(), "{f}");
    }
    assert!(read(&r.out("a/diagnostics.csv")).starts_with("t,energy,dissipation,div_residual,energy_residual,killing_amp_0"));
    let b = r.exec("solve", KILLING, "b", &[]);
    assert_eq!(b.status.code(), Some(0));
    for f in ["report.csv", "environment.csv", "velocity.csv", "pressure.csv", "diagnostics.csv"] {
        assert_eq!(read(&r.out("a").join(f)), read(&r.out("b").join(f)), "{f}");
    }
}

#[test]
fn initial_data_from_file() {
    let r = Run::new();
    let o = r.exec("solve", KILLING, "a", &[]);
    assert_eq!(o.status.code(), Some(0));
    let v0 = r.out("a/velocity.csv");
    let cfg = format!("grid.n = 16\nsolve.v0 = file:{}\nsolve.t_final = 0.01\n", v0.display());
    let o = r.exec("solve", &cfg, "b", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = r.exec("solve", "grid.n = 16\nsolve.v0 = file:missing.csv\n", "c", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
}

#[test]
fn damped_solve_decays() {
    let r = Run::new();
    let cfg = "grid.n = 16\nsolve.gamma0 = 1\nsolve.gamma1 = 1\nsolve.t_final = 0.2\nsolve.dt = 2e-3\n";
    let o = r.exec("solve", cfg, "o", &["--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read(&r.out("o/report.csv"));
    assert_eq!(row(&report, "energy_increase")[4], "pass");
    let ratio: f64 = row(&report, "energy_ratio")[1].parse().unwrap();
    assert!(ratio < (-0.2f64).exp());
    assert!(read(&r.out("o/environment.csv")).contains("seed,5\n"));
}

#[test]
fn killing_scans() {
    let r = Run::new();
    let o = r.exec("killing-scan", "killing.expect_r = 3\n", "sphere", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(read(&r.out("sphere/killing.csv")).lines().filter(|l| l.starts_with("R,")).count(), 3);
    let torus = "surface.shape = torus:3:1\nkilling.expect_r = 1\ndomain.g1 = azimuthal:1,0.1,1\nkilling.expect_rg = 0\ndomain.eps = 0.1\n";
    let o = r.exec("killing-scan", torus, "torus", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = r.exec("killing-scan", "killing.expect_r = 2\n", "wrong", &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn decompositions_round_trip() {
    let r = Run::new();
    for kind in ["weighted", "general"] {
        let cfg = format!("grid.n = 32\ndecompose.kind = {kind}\ndecompose.weight = affine:1,0,0,0.3\n");
        let o = r.exec("decompose", &cfg, kind, &[]);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stdout));
        let report = read(&r.out(kind).join("report.csv"));
        assert_eq!(row(&report, "round_trip")[4], "pass");
        assert_eq!(read(&r.out(kind).join("potential.csv")).lines().count(), 1 + 32 * 32);
    }
}

#[test]
fn tolerance_overrides() {
    let r = Run::new();
    let strict = r.file("strict.conf", "korn.min = 100\n");
    let o = r.exec("korn", "grid.n = 16\nkorn.modes = 3\n", "a", &["--tolerances", strict.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(read(&r.out("a/environment.csv")).contains("tolerance.korn.min,100\n"));
    let unknown = r.file("unknown.conf", "korn.max = 1\n");
    let o = r.exec("korn", "grid.n = 16\n", "b", &["--tolerances", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let r = Run::new();
    let cfg = r.file("k.conf", "grid.n = 16\nkorn.modes = 2\n");
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_thinshell"))
            .args(["korn", "--config", cfg.to_str().unwrap(), "--out", r.out("t").to_str().unwrap()])
            .env("THINSHELL_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("zero").status.code(), Some(2));
    assert_eq!(run("2").status.code(), Some(0));
}
