use std::path::Path;
use std::process::{Command, Output};

use reslab_core::export::parse_triads_csv;
use reslab_core::{satisfies_rectangular, Triad};

fn reslab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RESLAB_SEED")
        .output()
        .expect("spawn reslab")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn triads(dir: &Path) -> Vec<Triad> {
    parse_triads_csv(&read(dir, "triads.csv")).unwrap()
}

#[test]
fn enumerate_s1_at_simplest_triad() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(&["enumerate", "--bound", "2", "--set", "s1", "--k3", "2,0"], tmp.path());
    assert_eq!(code(&o), 0);
    assert_eq!(read(tmp.path(), "s1_pairs.csv"), "k1x,k1y,k2x,k2y\n1,-1,1,1\n1,1,1,-1\n");
    assert!(String::from_utf8_lossy(&o.stdout).contains(": 2"));
}

#[test]
fn enumerate_bound_zero_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(&["enumerate", "--bound", "0"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(triads(tmp.path()).is_empty());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "triads: 0");
}

#[test]
fn rectangular_output_is_filtered_square_output() {
    let tmp = tempfile::tempdir().unwrap();
    let (sq, rect) = (tmp.path().join("sq"), tmp.path().join("rect"));
    assert_eq!(code(&reslab(&["enumerate", "--bound", "6"], &sq)), 0);
    assert_eq!(code(&reslab(&["enumerate", "--bound", "6", "--box", "rect:2,1"], &rect)), 0);
    let filtered: Vec<Triad> = triads(&sq).into_iter().filter(|t| satisfies_rectangular(t, 2, 1).unwrap()).collect();
    let rect = triads(&rect);
    assert!(!rect.is_empty());
    assert_eq!(rect, filtered);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    for args in [
        &["enumerate", "--box", "rect:2,4"][..],
        &["enumerate", "--set", "s2"],
        &["enumerate", "--k3", "1"],
        &["simulate", "--scheme", "rk4"],
        &["simulate", "--h", "0.3"],
        &["simulate", "--damping", "cubic"],
        &["validate-averaging", "--nu", "0.1,oops"],
        &["validate-averaging", "--nu", "0.05,0.1"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&reslab(args, out)), 2, "{args:?}");
    }
}

#[test]
fn bound_exceeded_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(&["enumerate", "--bound", "9", "--max-bound", "8"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
}

#[test]
fn clusters_report_star_at_bound_four() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&reslab(&["clusters", "--bound", "4"], tmp.path())), 0);
    assert!(read(tmp.path(), "stars.csv").lines().any(|l| l == "0,1,8"));
    assert_eq!(read(tmp.path(), "components.csv"), "component,triads,vectors,pp,ap,aa\n0,112,80,568,208,56\n");
    assert_eq!(read(tmp.path(), "edges.txt").lines().count(), 832);
}

#[test]
fn clusters_empty_at_bound_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&reslab(&["clusters", "--bound", "0"], tmp.path())), 0);
    assert_eq!(read(tmp.path(), "stars.csv"), "centerX,centerY,N\n");
    assert_eq!(read(tmp.path(), "edges.txt"), "");
}

#[test]
fn simulate_case_a_matches_ou_variance() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(
        &[
            "simulate",
            "--case",
            "A",
            "--bound",
            "1",
            "--damping",
            "const:1",
            "--b",
            "1",
            "--h",
            "0.25",
            "--ensemble",
            "2048",
            "--checkpoints",
            "1",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let target = (1.0 - (-2.0f64).exp()) / 2.0;
    // |a|² is exponential, so its standard error is mean/√n.
    let tol = 4.0 * target / 2048f64.sqrt();
    let spectrum = read(tmp.path(), "spectrum.csv");
    let values: Vec<f64> = spectrum.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 8);
    for e in values {
        assert!((e - target).abs() < tol, "{e} vs {target}");
    }
    let meta: serde_json::Value = serde_json::from_str(&read(tmp.path(), "metadata.json")).unwrap();
    assert_eq!(meta["scheme"], "SplitExact");
    assert_eq!(meta["seed"], 0);
    assert!(meta["wiener_convention"].as_str().unwrap().contains("tau/2"));
}

#[test]
fn single_unforced_path_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(&["simulate", "--bound", "2", "--ensemble", "1", "--b", "0", "--h", "0.01"], tmp.path());
    assert_eq!(code(&o), 0);
    let ts = read(tmp.path(), "timeseries.csv");
    assert!(ts.starts_with("tau,mode,mean_re,mean_im,mean_abs2,var_abs2\n"));
    assert!(ts.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn seed_sources_and_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 5\n[domain]\nbound = 1\n[simulation]\nstep = 0.1\nensemble = 8\n").unwrap();
    let run = |dir: &str, env: Option<&str>, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_reslab"));
        cmd.args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).args(extra);
        cmd.env_remove("RESLAB_SEED");
        if let Some(s) = env {
            cmd.env("RESLAB_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        (read(&out, "resolved-config.toml"), read(&out, "timeseries.csv"))
    };
    let (file_cfg, file_ts) = run("file", None, &[]);
    assert!(file_cfg.starts_with("seed = 5\n"));
    assert!(file_cfg.contains("step = 0.1"));
    let (env_cfg, env_ts) = run("env", Some("9"), &[]);
    assert!(env_cfg.starts_with("seed = 9\n"));
    assert_ne!(env_ts, file_ts);
    let (flag_cfg, flag_ts) = run("flag", Some("9"), &["--seed", "5"]);
    assert_eq!(flag_cfg, file_cfg);
    assert_eq!(flag_ts, file_ts);
}

#[test]
fn unknown_config_keys_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let toml = tmp.path().join("bad.toml");
    std::fs::write(&toml, "[simulation]\nsteps = 10\n").unwrap();
    let json = tmp.path().join("bad.json");
    std::fs::write(&json, r#"{"model": {"damping": {"kind": "linear", "scale": 2}}}"#).unwrap();
    for path in [&toml, &json] {
        let o = reslab(&["simulate", "--config", path.to_str().unwrap()], &tmp.path().join("o"));
        assert_eq!(code(&o), 2, "{}", path.display());
    }
    let good = tmp.path().join("good.json");
    std::fs::write(&good, r#"{"domain": {"bound": 1}, "simulation": {"step": 0.5, "ensemble": 2}}"#).unwrap();
    assert_eq!(code(&reslab(&["simulate", "--config", good.to_str().unwrap()], &tmp.path().join("g"))), 0);
}

#[test]
fn zero_coupling_ladder_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = reslab(
        &[
            "validate-averaging",
            "--mu",
            "0",
            "--bound",
            "1",
            "--paths",
            "16",
            "--nu",
            "0.2,0.1,0.05",
            "--emit-plot-data",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "averaging.csv");
    assert!(csv.starts_with("nu,max_dev,l2_dev,paths,h_fast\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(read(tmp.path(), "plot_averaging.csv").starts_with("nu,kx,ky,direct_abs2,effective_abs2,deviation\n"));
}
