use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fraclab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn list_names_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["--list"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for sub in ["apply", "extend", "scatter", "energy", "renorm", "model-q", "verify-recursion", "report-all"] {
        assert!(text.lines().any(|l| l.starts_with(sub)), "{sub} missing from --list");
    }
}

#[test]
fn integer_gamma_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "command = extend\ngamma = 1.0\n");
    let o = fraclab(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("integer"));
}

#[test]
fn missing_output_directory_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "out.cfg",
        "command = verify-recursion\nkmax = 2\ntrials = 1\njson = nowhere/report.json\n",
    );
    let o = fraclab(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn unknown_key_and_bad_syntax_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("unknown.cfg", "command = model-q\nn = 4\ngamma = 1.5\ncolour = red\n"),
        ("syntax.cfg", "command = model-q\nn 4\n"),
        ("nocommand.cfg", "n = 4\n"),
        ("nested.cfg", "command = run\nconfig = x.cfg\n"),
    ] {
        let cfg = write_config(dir.path(), name, body);
        let o = fraclab(&["run", cfg.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 2, "{name}");
    }
    let o = fraclab(&["run", "absent.cfg"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["scatter", "--gamma", "0.75", "--n", "3", "--tolerance", "1e-30"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "q.cfg",
        "# model Q scan\ncommand = model-q\nn = 5\nscan = 1.25:1.75:3\noutput = q.csv\njson = q.json\n",
    );
    let mut seen = vec![];
    for _ in 0..2 {
        let o = fraclab(&["run", cfg.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        seen.push((std::fs::read(dir.path().join("q.csv")).unwrap(), std::fs::read(dir.path().join("q.json")).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
    let csv = String::from_utf8(seen[0].0.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("gamma,Q_closed,Q_numeric,rel_err,min_R"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn recursion_json_has_sorted_keys() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["verify-recursion", "--kmax", "4", "--trials", "3", "--seed", "9", "--json", "-"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["recursion"]["checks"], 3 * (2 + 3 + 4 + 5 + 2 * 4));
    assert!(!text.contains("runtime"));
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("command") < pos("pass") && pos("pass") < pos("recursion") && pos("recursion") < pos("rows"));
}

#[test]
fn apply_reads_and_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut input = String::from("i0,i1,value\n");
    let n = 8;
    for i in 0..n {
        for j in 0..n {
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            input.push_str(&format!("{i},{j},{}\n", x.cos()));
        }
    }
    std::fs::write(dir.path().join("f.csv"), input).unwrap();
    for route in ["fourier", "extension", "scattering"] {
        let o = fraclab(
            &["apply", "--route", route, "--gamma", "0.75", "--input", "f.csv", "--output", "pf.csv"],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{route}: {}", String::from_utf8_lossy(&o.stderr));
        // cos x is an eigenfunction with eigenvalue 1.
        let mut r = csv::Reader::from_path(dir.path().join("pf.csv")).unwrap();
        for rec in r.records() {
            let rec = rec.unwrap();
            let i: usize = rec[0].parse().unwrap();
            let v: f64 = rec[2].parse().unwrap();
            let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            assert!((v - x.cos()).abs() < 1e-6, "{route}: {v} vs {}", x.cos());
        }
    }
}

#[test]
fn extend_profile_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["extend", "--gamma", "0.5", "--method", "fd", "--output", "p.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("y,u,residual"));
    let second: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    // u = e^{-y} for gamma = 1/2.
    assert!((second[1] - (-second[0]).exp()).abs() < 1e-4);
}

#[test]
fn empty_report_is_empty_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["report-all", "--json", "-"], dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn report_aggregates_configs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "a.cfg", "command = verify-recursion\nkmax = 3\ntrials = 2\n");
    write_config(dir.path(), "b.cfg", "command = scatter\ngamma = 1.25\nn = 4\nlambda = 2\n");
    write_config(dir.path(), "all.cfg", "command = report-all\nconfig = a.cfg,b.cfg\noutput = table.csv\n");
    let o = fraclab(&["run", "all.cfg"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let table = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
    assert!(table.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(table.contains("\nb,"));

    write_config(dir.path(), "bad.cfg", "command = report-all\nconfig = a.cfg,missing.cfg\n");
    assert_eq!(code(&fraclab(&["run", "bad.cfg"], dir.path())), 2);
}

#[test]
fn shipped_suite_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["run", repo_config("verify-all.cfg").to_str().unwrap()], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{text}");
    assert!(text.contains("mutation d_gamma*1.01"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn fault_injection_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclab(&["report-all", "--suite", "--fault-dgamma", "1.01", "--threads", "2", "--json", "r.json"], dir.path());
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["fault_dgamma"], 1.01);
    let failed: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["group"].as_str().unwrap())
        .collect();
    for group in ["criterion 1", "criterion 5", "criterion 8"] {
        assert!(failed.contains(&group), "{group} should fail under fault injection");
    }
}
