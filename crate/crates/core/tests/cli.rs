use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gsqc");

fn gsqc(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("GSQC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const NOT: &str = r#"{ "qubits": 1, "steps": 1,
  "gates": [{ "kind": "single", "row": 1, "qubit": 0, "matrix": [[[0,0],[1,0]],[[1,0],[0,0]]] }],
  "pins": [{ "qubit": 0, "bit": 0 }] }"#;

const CNOT: &str = r#"{ "qubits": 2, "steps": 2,
  "gates": [{ "kind": "cnot", "row": 1, "control": 0, "target": 1 }],
  "pins": [{ "qubit": 0, "bit": 1 }, { "qubit": 1, "bit": 0 }] }"#;

#[test]
fn run_not_program() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "not.json", NOT);
    let o = gsqc(&["run", "--program", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["output"], serde_json::json!([["1", 1.0]]));
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["input"], "0");
}

#[test]
fn run_cnot_flips_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "cnot.json", CNOT);
    let o = gsqc(&["run", "--program", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["output"][0][0], "11");
    assert_eq!(v["output"].as_array().unwrap().len(), 1);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn malformed_program_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", r#"{ "qubits": 1, "stepz": 2 }"#);
    let o = gsqc(&["run", "--program", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stepz"), "{}", stderr(&o));

    let path = write(dir.path(), "range.json", r#"{ "qubits": 1, "steps": 2, "pins": [{ "qubit": 3, "bit": 0 }] }"#);
    let o = gsqc(&["run", "--program", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pin"), "{}", stderr(&o));

    let path = write(dir.path(), "free.json", r#"{ "qubits": 1, "steps": 2 }"#);
    assert_eq!(gsqc(&["run", "--program", &path]).status.code(), Some(2));
}

#[test]
fn single_qubit_gap_scan() {
    let o = gsqc(&["gap-scan", "--n", "2-12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.contains(",ok,")));
    let footer = text.lines().find(|l| l.starts_with("# fit")).unwrap();
    let exponent: f64 = footer
        .split_whitespace()
        .find_map(|w| w.strip_prefix("exponent="))
        .unwrap()
        .parse()
        .unwrap();
    // exact levels give -1.948 over N = 2..12
    assert!((exponent + 1.948).abs() < 1e-3, "{footer}");
}

#[test]
fn cnot_mid_sweep_within_bound() {
    let o = gsqc(&["gap-scan", "--n", "2-6", "--m", "2", "--layout", "cnot-mid"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut count = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[col("status")], "ok");
        assert_eq!(&rec[col("within_bound")], "true");
        assert_eq!(&rec[col("ground_dim")], "4");
        let gap: f64 = rec[col("gap")].parse().unwrap();
        assert!(gap > 0.0);
        count += 1;
    }
    assert_eq!(count, 5);
}

#[test]
fn empty_range_exits_2() {
    let o = gsqc(&["gap-scan", "--n", "5-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"));
    assert_eq!(gsqc(&["gap-scan", "--n", ""]).status.code(), Some(2));
}

#[test]
fn gap_scan_is_byte_identical() {
    let args = ["gap-scan", "--n", "2-5", "--m", "1,2", "--layout", "free", "--beta", "1,0.5"];
    let a = gsqc(&args);
    let b = gsqc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let threads = gsqc(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a.stdout, threads.stdout);
}

#[test]
fn oversized_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{ "dimension_cap": 100 }"#);
    let o = gsqc(&["--config", &cfg, "gap-scan", "--n", "10", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds"));
}

#[test]
fn detect_examples() {
    let o = gsqc(&["detect", "--n", "3", "--m", "1", "--beta", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v[0]["p_all_final"].as_f64().unwrap() - 0.25).abs() < 1e-10);
    assert!((v[0]["expected_attempts"].as_f64().unwrap() - 4.0).abs() < 1e-8);

    let o = gsqc(&["detect", "--n", "4", "--m", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    // beta = 1 row and the default 1/sqrt(MN) row
    assert_eq!(rows.len(), 2);
    let auto = &rows[1];
    assert!((auto["beta"].as_f64().unwrap() - 8f64.sqrt().recip()).abs() < 1e-15);
    let p = auto["p_all_final"].as_f64().unwrap();
    assert!((p - 4.0 / 9.0).abs() <= 0.1 * 4.0 / 9.0);

    let o = gsqc(&["detect", "--n", "3", "--beta", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "free.json", r#"{ "qubits": 1, "steps": 3 }"#);
    let matrix = dir.path().join("h.txt");
    let o = gsqc(&["spectrum", "--program", &path, "--k", "4", "--matrix", matrix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,energy"));
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(energies.len(), 4);
    let e2 = 2.0 * (1.0 - (std::f64::consts::PI / 4.0).cos());
    assert!((energies[2] - e2).abs() < 1e-10 && (energies[3] - e2).abs() < 1e-10);
    let h = gsqc::hamiltonian::SparseHermitian::read_coordinate(std::io::BufReader::new(
        std::fs::File::open(&matrix).unwrap(),
    ))
    .unwrap();
    assert_eq!(h.dim(), 8);
}

#[test]
fn verify_suite() {
    let o = gsqc(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("9 of 9 checks passed"));

    let o = gsqc(&["verify", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cnot spectrum oracle"));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL  cnot spectrum oracle")));

    let o = gsqc(&["verify", "--dense-cutoff", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{ "k": 5, "seed": 7, "dense_cutoff": 64 }"#);
    let o = gsqc(&["--config", &cfg, "--k", "3", "--show-config"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 3);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["dense_cutoff"], 64);
    assert_eq!(v["tol"], 1e-10);

    let o = Command::new(BIN)
        .args(["--show-config"])
        .env("GSQC_THREADS", "3")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threads"], 3);

    let bad = write(dir.path(), "bad.json", r#"{ "kk": 5 }"#);
    let o = gsqc(&["--config", &bad, "--show-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kk"));
}

#[test]
fn out_file_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = gsqc(&["gap-scan", "--n", "2-3", "--timing", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",wall_ms"));
}
