use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn binormal(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binormal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BINORMAL_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// Second column of a headed CSV.
fn values(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn sorted_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn assert_same_outputs(args: &[&str]) {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&binormal(args, &a)), 0);
    assert_eq!(code(&binormal(args, &b)), 0);
    let (fa, fb) = (sorted_files(&a), sorted_files(&b));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert!(fs::read(x).unwrap() == fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn stationary_explicit_profile_starts_at_two_thirds() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["stationary", "--A", "0", "--C", "3", "--k", "0", "--branch", "+", "--N", "256"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tau = values(&tmp.path().join("profile.csv"));
    assert_eq!(tau.len(), 256);
    assert!((tau[0] - 2.0 / 3.0).abs() < 1e-15);
    let r = report(tmp.path());
    assert!(r["energy_residual"].as_f64().unwrap() < 1e-10);
    assert!(tmp.path().join("profile.svg").exists());
}

#[test]
fn stationary_c_two_is_constant() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&binormal(&["stationary", "--A", "0", "--C", "2"], tmp.path())), 0);
    assert!(values(&tmp.path().join("profile.csv")).iter().all(|&t| t == 1.0));
}

#[test]
fn stationary_rejects_c_below_two() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["stationary", "--A", "0", "--C", "1"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("C >= 2"), "{}", stderr(&o));
}

#[test]
fn stationary_ode_branch_conserves_energy() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["stationary", "--A", "0.5", "--C", "3", "--N", "128", "--no-plot"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["method"], "ode");
    assert!(r["energy_residual"].as_f64().unwrap() < 1e-9);
    assert!(!tmp.path().join("profile.svg").exists());
    let o = binormal(&["stationary", "--A", "-5", "--C", "-5"], &tmp.path().join("x"));
    assert_eq!(code(&o), 2);
}

#[test]
fn evolve_constant_state_never_moves() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(
        &["evolve", "--init", "constant:1", "--t-end", "0.5", "--N", "32", "--sigma", "0.5", "--stride", "500"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let snaps: Vec<PathBuf> = sorted_files(tmp.path())
        .into_iter()
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with("snap_"))
        .collect();
    assert!(snaps.len() > 2);
    for s in snaps {
        assert!(values(&s).iter().all(|&t| t == 1.0));
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["complete"], true);
}

#[test]
fn evolve_explicit_profile_stays_put() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(
        &["evolve", "--init", "explicit:C=3", "--t-end", "0.5", "--N", "128", "--sigma", "0.5"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert!(r["final_deviation"].as_f64().unwrap() <= 1e-5, "{r}");
    assert!(tmp.path().join("diagnostics.svg").exists());
}

#[test]
fn evolve_from_file_conserves_total_torsion() {
    let tmp = TempDir::new().unwrap();
    let n = 64;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut csv = String::from("s,value\n");
    for j in 0..n {
        let s = j as f64 * h;
        csv += &format!("{s:.16e},{:.16e}\n", 1.0 + 0.1 * s.sin() + 0.05 * (2.0 * s).cos());
    }
    let input = tmp.path().join("perturbed.csv");
    fs::write(&input, csv).unwrap();
    let out = tmp.path().join("run");
    let init = format!("file:{}", input.display());
    let o = binormal(&["evolve", "--init", &init, "--t-end", "0.2", "--sigma", "0.5"], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["n"], 64);
    assert!(r["i2_drift"].as_f64().unwrap() <= 1e-10, "{r}");

    let o = binormal(&["evolve", "--init", &init, "--N", "32"], &tmp.path().join("bad"));
    assert_eq!(code(&o), 2);
}

#[test]
fn evolve_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(
        &["evolve", "--init", "explicit:C=3", "--N", "32", "--sigma", "0.5", "--floor", "0.5"],
        tmp.path(),
    );
    assert_eq!(code(&o), 1);
    let meta: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["complete"], false);
    assert_eq!(meta["status"]["state"], "aborted");
    for bad in [
        vec!["evolve", "--init", "constant:-1"],
        vec!["evolve", "--init", "constant:1", "--sigma", "2"],
        vec!["evolve", "--init", "helix"],
        vec!["evolve", "--init", "file:/nonexistent.csv"],
        vec!["evolve", "--init", "explicit:C=3", "--L", "2"],
    ] {
        assert_eq!(code(&binormal(&bad, &tmp.path().join("bad"))), 2, "{bad:?}");
    }
}

#[test]
fn linear_norm_history_is_constant() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["linear", "--tau0", "1", "--init", "mode:2", "--t", "0.3", "--N", "64"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let norms = column(&tmp.path().join("norm_history.csv"), "exact_norm");
    assert_eq!(norms.len(), 11);
    assert!(norms.iter().all(|x| (x - norms[0]).abs() <= 1e-12));
    let r = report(tmp.path());
    assert_eq!(r["pass"], true);
    assert!(r["difference_l2"].as_f64().unwrap() < 1e-4);
    for f in ["exact.csv", "fd.csv", "solution.svg", "norm_history.svg"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn linear_zero_stays_zero() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&binormal(&["linear", "--tau0", "1", "--init", "zero", "--N", "32"], tmp.path())), 0);
    for f in ["exact.csv", "fd.csv"] {
        assert!(values(&tmp.path().join(f)).iter().all(|&w| w == 0.0));
    }
}

#[test]
fn linear_records_coefficients() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&binormal(&["linear", "--tau0", "4", "--N", "32", "--t", "0.1"], tmp.path())), 0);
    let r = report(tmp.path());
    assert_eq!(r["coefficients"]["a"], 3.0625);
    assert_eq!(r["coefficients"]["b"], 0.0625);
}

#[test]
fn linear_rejects_nonpositive_background() {
    let tmp = TempDir::new().unwrap();
    for tau0 in ["0", "-1"] {
        assert_eq!(code(&binormal(&["linear", "--tau0", tau0], tmp.path())), 2);
    }
    assert_eq!(code(&binormal(&["linear", "--init", "mode:x"], tmp.path())), 2);
}

#[test]
fn chain_default_run_passes() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["chain"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["pass"], true);
    let steps = r["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 5);
    for s in steps {
        assert!(s["fitted_order"].as_f64().unwrap() >= s["order_floor"].as_f64().unwrap());
    }
}

#[test]
fn chain_constant_profiles_are_exact() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&binormal(&["chain", "--profile", "constant"], tmp.path())), 0);
    let r = report(tmp.path());
    for s in r["steps"].as_array().unwrap() {
        assert_eq!(s["exact"], true);
        assert!(s["residual"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() <= 1e-12));
    }
}

#[test]
fn chain_coarse_ladder_is_flagged() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["chain", "--N", "16"], tmp.path());
    assert_eq!(code(&o), 1);
    let r = report(tmp.path());
    assert_eq!(r["pass"], false);
    assert!(r["steps"].as_array().unwrap().iter().all(|s| s["reliable"] == false));
    assert_eq!(code(&binormal(&["chain", "--profile", "wavy"], tmp.path())), 2);
}

#[test]
fn reconstruct_constant_torsion_is_a_helix() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["reconstruct", "--tau", "constant:1", "--span", "12.566"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert!((r["helix"]["radius"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((r["helix"]["pitch"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
    assert!(r["round_trip"]["kappa_error"].as_f64().unwrap() < 1e-6);
    for plane in ["xy", "xz", "yz"] {
        assert!(tmp.path().join(format!("projection_{plane}.csv")).exists());
        assert!(tmp.path().join(format!("projection_{plane}.svg")).exists());
    }
}

#[test]
fn reconstruct_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["reconstruct", "--tau", "constant:-1"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("positive"), "{}", stderr(&o));
    let o = binormal(&["reconstruct", "--tau", "constant:1e300", "--span", "1", "--nodes", "10"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("degenerate"), "{}", stderr(&o));
    assert_eq!(code(&binormal(&["reconstruct", "--kappa", "0"], tmp.path())), 2);
}

#[test]
fn reconstruct_from_a_trajectory_snapshot() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let o = binormal(&["evolve", "--init", "explicit:C=3", "--N", "64", "--t-end", "0.05", "--sigma", "0.5"], &run);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tau = format!("snapshot:{}", run.display());
    let o = binormal(&["reconstruct", "--tau", &tau, "--span", "6", "--nodes", "600"], &tmp.path().join("curve"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&tmp.path().join("curve"));
    assert!(r["round_trip"]["tau_error"].as_f64().unwrap() < 1e-2, "{r}");
}

#[test]
fn reconstruct_xy_projection_matches_golden() {
    let tmp = TempDir::new().unwrap();
    let o = binormal(&["reconstruct", "--tau", "explicit:C=3", "--span", "62.83"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = fs::read_to_string(tmp.path().join("projection_xy.svg")).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reconstruct_xy.svg");
    if std::env::var_os("BINORMAL_BLESS").is_some() {
        fs::write(&golden, &svg).unwrap();
    }
    assert!(svg == fs::read_to_string(&golden).unwrap(), "projection_xy.svg differs from the golden file");
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    assert_same_outputs(&["stationary", "--A", "0.5", "--C", "3", "--N", "64"]);
    assert_same_outputs(&["evolve", "--init", "explicit:C=3", "--N", "32", "--t-end", "0.05", "--sigma", "0.5"]);
    assert_same_outputs(&["linear", "--N", "32", "--t", "0.05"]);
    assert_same_outputs(&["chain"]);
    assert_same_outputs(&["reconstruct", "--span", "10", "--nodes", "500"]);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    let from_cfg = tmp.path().join("from_config");
    fs::write(&cfg, format!("[stationary]\nC = 5\nN = 64\nout = {:?}\nplot = false\n", from_cfg)).unwrap();
    let bin = env!("CARGO_BIN_EXE_binormal");

    let o = Command::new(bin).args(["stationary", "--config"]).arg(&cfg).env_remove("BINORMAL_OUT").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&from_cfg);
    assert_eq!((r["params"]["c"].as_f64(), r["n"].as_u64()), (Some(5.0), Some(64)));
    assert!(!from_cfg.join("profile.svg").exists());

    let from_env = tmp.path().join("from_env");
    let o = Command::new(bin)
        .args(["stationary", "--N", "32", "--config"])
        .arg(&cfg)
        .env("BINORMAL_OUT", &from_env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&from_env);
    assert_eq!((r["params"]["c"].as_f64(), r["n"].as_u64()), (Some(5.0), Some(32)));

    let from_flag = tmp.path().join("from_flag");
    let o = Command::new(bin)
        .args(["stationary", "--C", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&from_flag)
        .env("BINORMAL_OUT", &from_env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&from_flag)["params"]["c"].as_f64(), Some(3.0));

    fs::write(&cfg, "[stationary]\nbogus = 1\n").unwrap();
    let o = Command::new(bin).args(["stationary", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn figure_recipes_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, sub) in [("figure1", "stationary"), ("figure2", "reconstruct"), ("figure3", "reconstruct")] {
        let text = fs::read_to_string(root.join(format!("{name}.toml"))).unwrap();
        let doc: toml::Table = toml::from_str(&text).unwrap();
        assert!(doc[sub].is_table(), "{name}");
    }
}
