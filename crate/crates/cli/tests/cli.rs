use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn lab(out: &Path, args: &[&str]) -> Output {
    lab_env(out, args, &[])
}

fn lab_env(out: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_firey-lab"));
    cmd.arg("--out").arg(out).args(args).env_remove("FIREY_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn firey-lab")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Summary JSON printed last on stdout, after any progress lines.
fn stdout_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stdout);
    let start = if text.starts_with('{') { 0 } else { text.rfind("\n{").expect("summary json") + 1 };
    serde_json::from_str(&text[start..]).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let start = text.find('{').expect("error json on stderr");
    serde_json::from_str(&text[start..]).unwrap()
}

fn write_body(out: &Path, args: &[&str]) -> std::path::PathBuf {
    let o = lab(out, &[&["body"], args].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("body.json")
}

#[test]
fn unit_ball_verifies_with_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let body = write_body(&dir.path().join("b"), &["--n", "3"]);
    let out = dir.path().join("v");
    let o = lab(&out, &["verify", "--body", body.to_str().unwrap(), "--G", "power:2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout_json(&o);
    assert!(s["max_abs"].as_f64().unwrap() < 1e-12);
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"]["subcommand"], "verify");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
    assert!(m["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn manifest_checksums_match_written_files() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let body = write_body(&dir.path().join("b"), &["--shape", "ellipse", "--a", "1.5", "--b", "0.8"]);
    let out = dir.path().join("d");
    let o = lab(&out, &["density", "--body", body.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&out.join("manifest.json"));
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for rec in outputs {
        let bytes = std::fs::read(out.join(rec["path"].as_str().unwrap())).unwrap();
        assert_eq!(rec["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
        assert_eq!(rec["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn counterexample_in_three_dimensions_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["counterexample", "--n", "3", "--r", "1", "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout_json(&o);
    assert!(s["residual_max_abs"].as_f64().unwrap() <= 1e-6);
    assert_eq!(s["an_pass"], true);
    assert!(s["non_sphericity"].as_f64().unwrap() > 0.0);
    for f in ["body.json", "body_centred.json", "g_m.json", "residual.csv", "certificates.json", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("residual.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "phi,h,f,G,r");
}

#[test]
fn critical_power_fails_the_class_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["check-an", "--G", "power:-4", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["kind"], "an_violation");
    assert_eq!(read_json(&dir.path().join("error.json")), e);
    assert_eq!(read_json(&dir.path().join("manifest.json"))["status"], "failed");
}

#[test]
fn non_convex_input_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let h: Vec<f64> = (0..256).map(|k| 1.0 + 0.5 * (3.0 * k as f64 * std::f64::consts::TAU / 256.0).cos()).collect();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::json!({ "n": 2, "grid_N": 256, "h": h }).to_string()).unwrap();
    let o = lab(&dir.path().join("o"), &["density", "--body", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["kind"], "non_convex");
    assert!(!e["details"]["nodes"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["no-such-command"],
        vec!["--grid-n", "300", "body"],
        vec!["--tol", "-1", "body"],
        vec!["--format", "xml", "body"],
        vec!["check-an"],
        vec!["report", "--criteria", "11"],
    ] {
        let o = lab(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&o)["kind"], "usage", "{args:?}");
    }
    let o = lab(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab_env(dir.path(), &["body"], &[("FIREY_LAB_THREADS", "0")]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab_env(dir.path(), &["body"], &[("FIREY_LAB_THREADS", "2")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn csv_format_writes_tables_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let body = write_body(&dir.path().join("b"), &["--r", "2"]);
    let out = dir.path().join("d");
    let o = lab(&out, &["--format", "csv", "density", "--body", body.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "phi,f");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 1024);
    assert!(rows.iter().all(|r| (r[1] - 2.0).abs() < 1e-9));
    assert!(!out.join("density.json").exists());
}

#[test]
fn polar_of_polar_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let body = write_body(&dir.path().join("b"), &["--shape", "ellipse", "--a", "1.4", "--b", "0.9", "--shift", "0.1"]);
    let p1 = dir.path().join("p1");
    assert_eq!(lab(&p1, &["polar", "--body", body.to_str().unwrap()]).status.code(), Some(0));
    let p2 = dir.path().join("p2");
    assert_eq!(lab(&p2, &["polar", "--body", p1.join("polar.json").to_str().unwrap()]).status.code(), Some(0));
    let h0: Vec<f64> = serde_json::from_value(read_json(&body)["h"].clone()).unwrap();
    let h2: Vec<f64> = serde_json::from_value(read_json(&p2.join("polar.json"))["h"].clone()).unwrap();
    let d = h0.iter().zip(&h2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-6, "{d}");
}

#[test]
fn identical_configurations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = lab(&out, &["--seed", "7", "solve2d", "--G", "power:-3", "--seeds", "4"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        let contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
            .collect();
        (contents, o.stdout)
    };
    let (a, sa) = run("a");
    let (b, sb) = run("b");
    assert!(a.iter().any(|(n, _)| n == "manifest.json"));
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn report_collects_earlier_runs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("runs/r1");
    let o = lab(&first, &["report", "--criteria", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS criterion  1"));
    let md = std::fs::read_to_string(first.join("acceptance.md")).unwrap();
    assert!(md.contains("| 1 |"));
    let o = lab(&dir.path().join("summary"), &["report", "--from", dir.path().join("runs").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["passed"], 1);
}
