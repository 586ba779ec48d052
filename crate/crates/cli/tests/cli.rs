use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn horolab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horolab"))
        .args(args)
        .current_dir(dir)
        .env("HOROLAB_THREADS", "2")
        .output()
        .unwrap()
}

fn run(cmd: &str, config: &str, dir: &Path, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.cfg"));
    fs::write(&cfg, config).unwrap();
    horolab(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out], dir)
}

fn summary_value(dir: &Path, out: &str, key: &str) -> String {
    let text = fs::read_to_string(dir.join(out).join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from summary"))
}

#[test]
fn missing_config_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = horolab(&["build", "--out", "x"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = horolab(&[], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_is_parse_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run("build", "rho = constant:1\ncolour = blue\n", d.path(), "a");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let o = run("build", "rho = constant:x\n", d.path(), "b");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_sphere() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        "build",
        "rho = constant:0.6931471805599453\nL = 8\n",
        d.path(),
        "s",
    );
    assert!(o.status.success());
    for key in ["kappa_min", "kappa_max"] {
        let k: f64 = summary_value(d.path(), "s", key).parse().unwrap();
        assert!((k + 5.0 / 3.0).abs() <= 1e-9);
    }
    assert_eq!(summary_value(d.path(), "s", "umbilic"), "true");
    assert!(d.path().join("s/report.csv").exists());
    assert!(d.path().join("s/mesh.obj").exists());
}

#[test]
fn build_singular_suggests_dilation() {
    let d = tempfile::tempdir().unwrap();
    let o = run("build", "rho = coordinate:3:0:1\nL = 8\n", d.path(), "c");
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("singular") && err.contains("tau = 2.0"),
        "{err}"
    );

    let o = run(
        "build",
        "rho = coordinate:3:0:1\nL = 8\ntau = auto\n",
        d.path(),
        "c2",
    );
    assert!(o.status.success());
    assert_eq!(summary_value(d.path(), "c2", "tau"), "2.0");
    let report = fs::read_to_string(d.path().join("c2/report.csv")).unwrap();
    assert!(report.lines().skip(1).all(|l| l.ends_with(",1")));
}

#[test]
fn solve_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "target = constant:0.5\nL = 10\ntol = 1e-11\n";
    assert!(run("solve", cfg, d.path(), "a").status.success());
    assert!(run("solve", cfg, d.path(), "b").status.success());
    assert_eq!(summary_value(d.path(), "a", "status"), "converged");
    for f in [
        "rho.csv",
        "residuals.csv",
        "kw.csv",
        "report.csv",
        "mesh.obj",
        "summary.txt",
    ] {
        let a = fs::read(d.path().join("a").join(f)).unwrap();
        let b = fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let kw = fs::read_to_string(d.path().join("a/kw.csv")).unwrap();
    assert!(kw.starts_with("i,value\n1,"));
}

#[test]
fn solved_rho_feeds_build() {
    let d = tempfile::tempdir().unwrap();
    assert!(
        run("solve", "target = constant:0.5\nL = 8\n", d.path(), "s")
            .status
            .success()
    );
    let o = run("build", "rho = s/rho.csv\n", d.path(), "b");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c: f64 = summary_value(d.path(), "b", "christoffel_max")
        .parse()
        .unwrap();
    assert!((c - 0.375).abs() < 1e-9);
}

#[test]
fn solve_obstructed_target() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        "solve",
        "target = coordinate:3:2:1\nL = 8\nmax_iter = 15\n",
        d.path(),
        "m",
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        summary_value(d.path(), "m", "status"),
        "obstruction-suspected"
    );
    let kw3: f64 = summary_value(d.path(), "m", "kw_3").parse().unwrap();
    assert!(kw3.abs() >= 1.0);
    assert!(d.path().join("m/residuals.csv").exists());
}

#[test]
fn corrupted_csv_is_parse_error() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("rho.csv"),
        "theta,phi,value\n0.1,0.0,1.0\n0.2,oops,1.0\n",
    )
    .unwrap();
    for cmd in ["build", "verify", "dual"] {
        let o = run(cmd, "rho = rho.csv\nquick = true\nL = 8\n", d.path(), cmd);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("rho.csv") && err.contains("line"), "{err}");
    }
    let o = run("build", "rho = missing.csv\n", d.path(), "x");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dual_table() {
    let d = tempfile::tempdir().unwrap();
    let o = run("dual", "rho = coordinate:3:0.3:0.2\nL = 6\n", d.path(), "d");
    assert!(o.status.success());
    let table = fs::read_to_string(d.path().join("d/dual.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next(),
        Some("theta,phi,lambda_i,lambda_star_i,product")
    );
    for l in lines {
        let p: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((p - 1.0).abs() < 1e-5);
    }
}

#[test]
fn dual_lists_failed_nodes() {
    let d = tempfile::tempdir().unwrap();
    // rho = 0 has lambda = 1/2 everywhere, which the flow cannot invert at t = 0
    let o = run("dual", "rho = constant:0\nL = 4\nt = 0\n", d.path(), "z");
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("node 0"), "{err}");
}

#[test]
fn weingarten_sphere() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        "weingarten",
        "rho = constant:0.5\nL = 6\nk = 1\n",
        d.path(),
        "w",
    );
    assert!(o.status.success());
    let spread: f64 = summary_value(d.path(), "w", "max_spread").parse().unwrap();
    assert!(spread <= 1e-10);
    let table = fs::read_to_string(d.path().join("w/weingarten.csv")).unwrap();
    assert!(table.starts_with("theta,phi,kappa_1,kappa_2,"));
}

#[test]
fn quick_verify_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run("verify", "L = 8\nquick = true\n", d.path(), "v");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    for f in [
        "verify.csv",
        "dual.csv",
        "rho.csv",
        "residuals.csv",
        "kw.csv",
        "report.csv",
        "mesh.obj",
    ] {
        assert!(d.path().join("v").join(f).exists(), "{f}");
    }
    let table = fs::read_to_string(d.path().join("v/verify.csv")).unwrap();
    assert!(table.starts_with("name,value,relation,bound,pass\n"));
    assert!(table.lines().skip(1).all(|l| l.ends_with(",1")));
}
