use std::path::Path;
use std::process::Command;

fn aggdiff(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_aggdiff"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn convexity_scan_reproduces_tangent_family() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = aggdiff(dir.path(), &["--n", "3", "--k", "-2.5", "convexity-scan", "--resolution", "100"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("tangents.csv")).unwrap();
    assert!(csv.starts_with("t,theta_over_k,tangent_c0.2,tangent_c0.4,tangent_c0.6,tangent_c0.8\n"));
    assert_eq!(csv.lines().count(), 201);
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[2..].iter().all(|t| *t <= v[1] + 1e-9));
    }
    assert!(dir.path().join("convexity-scan.manifest.json").exists());
}

#[test]
fn unknown_subcommand_and_bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aggdiff(dir.path(), &["frobnicate"]).0, 2);
    assert_eq!(aggdiff(dir.path(), &["steady", "--no-such-flag"]).0, 2);
    assert_eq!(aggdiff(dir.path(), &["--chi", "0.5", "steady"]).0, 2);
    assert_eq!(aggdiff(dir.path(), &["--cells", "4", "steady"]).0, 2);
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[params]\nn = 3\nk = -1.0\nm = 2.0\nchi = 0.0\nmass = 1.0\nbogus = 4\n").unwrap();
    let (code, err) = aggdiff(dir.path(), &["--config", cfg.to_str().unwrap(), "energy"]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");
    std::fs::write(&cfg, "[params]\nn = 3\nk = -1.0\nm = \"mx\"\nchi = 0.0\nmass = 1.0\n").unwrap();
    let (code, err) = aggdiff(dir.path(), &["--config", cfg.to_str().unwrap(), "energy"]);
    assert_eq!(code, 2);
    assert!(err.contains("mx"), "{err}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n[params]\nn = 3\nk = -1.5\nm = \"mc\"\nchi = 1.0\nmass = 0.5\n[grid]\ncells = 64\nr_max = 2.0\n[tolerances]\nsteady = 1e-11\n",
    )
    .unwrap();
    let (code, _) = aggdiff(dir.path(), &["--config", cfg.to_str().unwrap(), "--mass", "0.4", "energy"]);
    assert_eq!(code, 0);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("energy.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["params"]["mass"], 0.4);
    assert_eq!(m["config"]["tolerances"]["steady"], 1e-11);
    assert_eq!(m["config"]["tolerances"]["fuzz"], 1e-6);
}

#[test]
fn fuzz_passes_at_fair_competition() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--k", "-1.5", "--m", "mc", "--chi", "1", "--mass", "0.5", "--cells", "100"];
    let (code, _) = aggdiff(dir.path(), &[&args[..], &["inequality-fuzz", "--trials", "200"]].concat());
    assert_eq!(code, 0);
}

#[test]
fn identical_runs_write_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--k", "-1.5", "--chi", "1", "--cells", "48", "--threads", "1", "transport"];
    assert_eq!(aggdiff(a.path(), &args).0, 0);
    let args4 = ["--k", "-1.5", "--chi", "1", "--cells", "48", "--threads", "4", "transport"];
    assert_eq!(aggdiff(b.path(), &args4).0, 0);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(a.path(), "transport.csv"), read(b.path(), "transport.csv"));
    assert_eq!(read(a.path(), "transport.json"), read(b.path(), "transport.json"));
}

#[test]
fn steady_simulate_and_friends() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // the default verification tolerances need a finer grid than this
    assert_eq!(aggdiff(p, &["--cells", "64", "steady"]).0, 1);
    let loose = ["--tol", "characterization=1e-3", "--tol", "identity=1e-3", "--tol", "virial=1e-3"];
    assert_eq!(aggdiff(p, &[&["--cells", "64"][..], &loose, &["steady"]].concat()).0, 0);
    let steady_csv = p.join("steady.csv");
    assert!(std::fs::read_to_string(&steady_csv).unwrap().starts_with("r,rho\n"));
    let input = steady_csv.to_str().unwrap();
    assert_eq!(aggdiff(p, &["potential", "--input", input]).0, 0);
    assert_eq!(aggdiff(p, &["energy", "--input", input]).0, 0);
    assert_eq!(aggdiff(p, &["--k", "-2", "theta", "--points", "50"]).0, 0);
    assert_eq!(aggdiff(p, &["hyp", "--a", "0.5", "--b", "-0.3", "--c", "1.5", "--z", "0.7"]).0, 0);
    let (code, _) = aggdiff(p, &["--cells", "32", "--r-max", "1.6", "simulate", "--t-max", "0.05", "--snapshot-every", "100"]);
    assert_eq!(code, 0);
    let energy = std::fs::read_to_string(p.join("energy.csv")).unwrap();
    assert!(energy.starts_with("t,energy\n") && energy.lines().count() > 2);
    assert!(std::fs::read_to_string(p.join("snapshots.csv")).unwrap().starts_with("t,r,rho\n"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_aggdiff"))
        .args(["--k", "-2", "theta", "--points", "20"])
        .env("AGGDIFF_OUT", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("theta.csv").exists());
}
