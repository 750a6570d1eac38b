use std::path::Path;
use std::process::Command;

use hokdv::{run, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};

fn hokdv(out: &Path, args: &[&str]) -> i32 {
    let mut v = vec!["hokdv".to_string()];
    v.extend(args.iter().map(|s| s.to_string()));
    v.push("--out".into());
    v.push(out.display().to_string());
    run(v)
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn resonance_check_reports_constant_cofactor_for_kdv() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(hokdv(d.path(), &["resonance-check", "--j", "1", "--K", "16", "--tuples_csv", "true"]), EXIT_OK);
    let m = manifest(d.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["summary"]["gamma3"]["constant_q"], "3");
    assert_eq!(m["summary"]["gamma4"]["constant_q"], "3");
    let csv = std::fs::read_to_string(d.path().join("resonance_tuples.csv")).unwrap();
    assert!(csv.starts_with("n,k1,k2,k3,k4,P,Q,ratio\n"));
    // 3-tuples: k1 = -3, k2 = 1, k3 = 2 gives P = -27 + 1 + 8 = -18 = -6 * 3
    assert!(csv.contains("\n3,-3,1,2,,-18,3,3\n"), "{}", &csv[..200]);
}

#[test]
fn flags_override_file_and_hash_ignores_order() {
    let d = tempfile::tempdir().unwrap();
    let a = d.path().join("a.toml");
    let b = d.path().join("b.toml");
    std::fs::write(&a, "j = 3\nK = 8\nT = 0.01\ndt = 0.001\nsample_every = 5\n").unwrap();
    std::fs::write(&b, "sample_every = 5\ndt = 0.001\nT = 0.01\nK = 8\nj = 2\n").unwrap();
    let (o1, o2) = (d.path().join("o1"), d.path().join("o2"));
    let cfg_a = a.display().to_string();
    let cfg_b = b.display().to_string();
    assert_eq!(hokdv(&o1, &["solve", "--config", &cfg_a, "--j", "2"]), EXIT_OK);
    assert_eq!(hokdv(&o2, &["solve", "--config", &cfg_b]), EXIT_OK);
    let (m1, m2) = (manifest(&o1), manifest(&o2));
    assert_eq!(m1["config"]["j"], 2);
    assert_eq!(m1["config_hash"], m2["config_hash"]);
    assert_eq!(m1["config"]["scheme"], "etdrk4");
    assert_eq!(
        files(&o1),
        ["manifest.json", "solve_0000.toml", "solve_0001.toml", "solve_0002.toml", "solve_conserved.csv"]
    );
    assert_eq!(
        std::fs::read(o1.join("solve_conserved.csv")).unwrap(),
        std::fs::read(o2.join("solve_conserved.csv")).unwrap()
    );
}

#[test]
fn configuration_errors_exit_2_and_name_the_key() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "jj = 2\nK = 8\n").unwrap();
    let path = cfg.display().to_string();
    assert_eq!(hokdv(d.path(), &["solve", "--config", &path]), EXIT_CONFIG);
    let m = manifest(d.path());
    assert_eq!(m["status"], "config-error");
    assert!(m["error"].as_str().unwrap().contains("\"jj\""));

    assert_eq!(hokdv(d.path(), &["solve", "--j", "2"]), EXIT_CONFIG);
    assert!(manifest(d.path())["error"].as_str().unwrap().contains("\"K\""));

    assert_eq!(hokdv(d.path(), &["solve", "--j", "2", "--K", "8", "--dt", "0"]), EXIT_CONFIG);
    assert_eq!(hokdv(d.path(), &["solve", "--j", "2", "--K", "8", "--dt", "fast"]), EXIT_CONFIG);
    assert_eq!(hokdv(d.path(), &["solve", "--j", "2", "--K", "8", "--scheme", "euler"]), EXIT_CONFIG);
    assert_eq!(hokdv(d.path(), &["solve", "--j", "2", "--K", "8", "--bogus", "1"]), EXIT_CONFIG);
    assert_eq!(hokdv(d.path(), &["almost-cons", "--j", "2", "--K", "8", "--N_list", "8,4"]), EXIT_CONFIG);
}

#[test]
fn solve_reads_a_snapshot() {
    let d = tempfile::tempdir().unwrap();
    let snap = d.path().join("u0.toml");
    std::fs::write(&snap, "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[1, 0.5, 0.0], [2, 0.0, 0.1]]\n").unwrap();
    let s = snap.display().to_string();
    let out = d.path().join("o");
    let args = ["solve", "--j", "2", "--K", "8", "--T", "0.01", "--sample_every", "10", "--input", &s, "--output", "u"];
    assert_eq!(hokdv(&out, &args), EXIT_OK);
    let last = hokdv_core::snapshot::read(&out.join("u_0001.toml")).unwrap();
    assert_eq!(last.grid().k_max(), 8);
    assert!((last.sobolev_norm(0.0) - hokdv_core::snapshot::read(&snap).unwrap().sobolev_norm(0.0)).abs() < 1e-8);

    let args = ["solve", "--j", "3", "--K", "8", "--input", &s];
    assert_eq!(hokdv(&out, &args), EXIT_CONFIG);
    std::fs::write(&snap, "schema_version = 1\nj = 2\nmu = 1.0\nK = 4\ncoeffs = [[0, 0.5, 0.0]]\n").unwrap();
    assert_eq!(hokdv(&out, &["solve", "--j", "2", "--K", "8", "--input", &s]), EXIT_CONFIG);
}

#[test]
fn energies_csv_columns() {
    let d = tempfile::tempdir().unwrap();
    let args = ["energies", "--j", "2", "--K", "8", "--N", "3", "--orders", "2,4", "--data_band", "5", "--T", "1e-3"];
    assert_eq!(hokdv(d.path(), &args), EXIT_OK);
    let csv = std::fs::read_to_string(d.path().join("energies.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E2,E4,Lambda5M5"));
    assert_eq!(lines.count(), 2);
    assert_eq!(hokdv(d.path(), &["energies", "--j", "2", "--K", "8", "--N", "3", "--orders", "5"]), EXIT_CONFIG);
}

#[test]
fn almost_cons_names_the_violating_pair() {
    // data below every level: no drift to measure at any N, so no decrease
    let d = tempfile::tempdir().unwrap();
    let args = [
        "almost-cons", "--j", "2", "--K", "8", "--N_list", "2,4,8", "--T", "0.01", "--data_band", "1", "--data_s", "0",
    ];
    assert_eq!(hokdv(d.path(), &args), EXIT_FAILED);
    let m = manifest(d.path());
    assert_eq!(m["status"], "check-failed");
    let e = m["error"].as_str().unwrap();
    assert!(e.contains("from N = 4 to N = 8"), "{e}");
    assert!(d.path().join("almost-cons.csv").exists());
}

#[test]
fn sweeps_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "j = 2\nK = 64\nN_list = [4, 8, 16]\nT = 0.05\nscheme = \"filon_midpoint\"\ndata_band = 4\ndata_decay = 0.5\nseed = 7\n",
    )
    .unwrap();
    let c = cfg.display().to_string();
    let (o1, o2) = (d.path().join("a"), d.path().join("b"));
    assert_eq!(hokdv(&o1, &["approx-sweep", "--config", &c]), EXIT_OK);
    assert_eq!(hokdv(&o2, &["approx-sweep", "--config", &c, "--threads", "1"]), EXIT_OK);
    let a = std::fs::read(o1.join("approx-sweep.csv")).unwrap();
    assert_eq!(a, std::fs::read(o2.join("approx-sweep.csv")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("N,"));
    let m = manifest(&o1);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["outputs"], serde_json::json!(["approx-sweep.csv"]));
    assert!(m["summary"]["fit"]["exponent"].as_f64().unwrap() < 0.0);
}

#[test]
fn squeeze_and_scaling_runs() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "squeeze", "--j", "2", "--K", "4", "--T", "0.02", "--samples", "4", "--ascent_sweeps", "5", "--k0", "2", "--z",
        "0.1,-0.2", "--r", "0.5",
    ];
    assert_eq!(hokdv(d.path(), &args), EXIT_OK);
    assert!(manifest(d.path())["summary"]["value"].as_f64().unwrap() >= 0.5);
    assert!(d.path().join("squeeze_witness.toml").exists());
    let mut args = args.to_vec();
    *args.last_mut().unwrap() = "100";
    assert_eq!(hokdv(d.path(), &args), EXIT_FAILED);

    let args = ["scaling-check", "--j", "2", "--K", "8", "--T", "0.01", "--s", "-1.5", "--data_band", "4"];
    assert_eq!(hokdv(d.path(), &args), EXIT_OK);
    let m = manifest(d.path());
    assert!(m["summary"]["ratio_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn binary_uses_env_output_directory() {
    let d = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hokdv"))
        .args(["resonance-check", "--j", "2", "--K", "6"])
        .env("HOKDV_OUT", d.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    assert_eq!(files(d.path()), ["manifest.json"]);
    let status = Command::new(env!("CARGO_BIN_EXE_hokdv")).args(["solve", "--j", "2"]).env("HOKDV_OUT", d.path()).status().unwrap();
    assert_eq!(status.code(), Some(EXIT_CONFIG));
}
