use std::path::Path;
use std::process::{Command, Output};

const PARAMS: &str =
    r#""params": {"C1": 2, "E1": 1, "omega1": 1, "C2": 3, "E2": 1.5, "omega2": 2, "a": 0.5}"#;
const TARGET: &str = r#""params_g": {"C1": 4, "E1": 2, "omega1": 2.3333333333333335, "C2": 6, "E2": 3, "omega2": 1, "a": 0.25}"#;
const WRONG_TARGET: &str = r#""params_g": {"C1": 4, "E1": 2, "omega1": 2.3333333333333335, "C2": 6.6, "E2": 3, "omega2": 1, "a": 0.25}"#;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, format!("{{{body}}}")).unwrap();
    path
}

fn bykov(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bykov"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn simulate_writes_the_reference_times() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PARAMS);
    let out = bykov(&["simulate", "--pairs", "8"], &cfg, dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("hitting.csv"));
    assert_eq!(
        header,
        ["index", "time", "chart", "theta_lifted", "log_coord"]
    );
    assert_eq!(rows.len(), 17);
    let t1: f64 = rows[1][1].parse().unwrap();
    assert!((t1 - 2.995732273553991).abs() < 1e-12);
    assert_eq!(rows[1][2], "Out1");
    assert_eq!(rows[2][2], "Out2");
    let bytes = std::fs::read(dir.path().join("hitting.csv")).unwrap();
    assert!(!bytes.contains(&b'\r'));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PARAMS);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for cmd in ["simulate", "diagnostics", "birkhoff", "adjusted"] {
        assert_eq!(bykov(&[cmd], &cfg, &a).status.code(), Some(0), "{cmd}");
        assert_eq!(bykov(&[cmd], &cfg, &b).status.code(), Some(0), "{cmd}");
    }
    for f in [
        "hitting.csv",
        "diagnostics.csv",
        "birkhoff.csv",
        "adjusted.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn diagnostics_and_adjusted_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PARAMS);
    assert_eq!(
        bykov(&["diagnostics"], &cfg, dir.path()).status.code(),
        Some(0)
    );
    let (header, rows) = read_csv(&dir.path().join("diagnostics.csv"));
    assert_eq!(
        header,
        ["i", "lemma1", "lemma2", "lemma3", "residual", "ratio1", "ratio2", "ratio3", "ratio4"]
    );
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][1], "");
    let lemma1: f64 = rows[1][1].parse().unwrap();
    assert!((lemma1 - std::f64::consts::LN_2).abs() < 1e-10);

    assert_eq!(
        bykov(&["adjusted"], &cfg, dir.path()).status.code(),
        Some(0)
    );
    let (header, rows) = read_csv(&dir.path().join("adjusted.csv"));
    assert_eq!(
        header,
        [
            "i",
            "T",
            "Ttil",
            "t_even",
            "t_til_even",
            "t_odd",
            "t_til_odd",
            "diff"
        ]
    );
    assert_eq!(rows.len(), 13);
    let ttil0: f64 = rows[0][2].parse().unwrap();
    assert!((ttil0 - 6.990041971625979).abs() < 1e-12);
}

#[test]
fn birkhoff_certificate_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PARAMS);
    assert_eq!(
        bykov(&["birkhoff"], &cfg, dir.path()).status.code(),
        Some(0)
    );
    let (header, rows) = read_csv(&dir.path().join("birkhoff.csv"));
    assert_eq!(
        header,
        [
            "parity",
            "index",
            "time",
            "average",
            "predicted",
            "abs_error"
        ]
    );
    assert_eq!(rows.len(), 24);
    assert_eq!(rows[1][0], "even");
    let avg: f64 = rows[1][3].parse().unwrap();
    assert!((avg - 4.0 / 7.0).abs() < 1e-12);

    let flat = format!(
        r#"{PARAMS}, "observable": {{"kind": "piecewise_constant", "g_sigma1": 1, "g_sigma2": 1}}"#
    );
    let cfg = write_config(dir.path(), &flat);
    assert_eq!(
        bykov(&["birkhoff"], &cfg, dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn conjugacy_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{PARAMS}, {TARGET}, \"n_pairs\": 10"));
    let out = bykov(&["conjugacy"], &cfg, dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("conjugacy.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], true);
    assert!(report["max_dev"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["deviations"].as_array().unwrap().len(), 20);
    assert!((report["image"]["z0"].as_f64().unwrap() - 0.01).abs() < 1e-12);
    assert!((report["image"]["rho1"].as_f64().unwrap() - 6.25e-6).abs() < 1e-16);

    let cfg = write_config(dir.path(), &format!("{PARAMS}, {WRONG_TARGET}"));
    assert_eq!(
        bykov(&["conjugacy"], &cfg, dir.path()).status.code(),
        Some(2)
    );

    let cfg = write_config(dir.path(), PARAMS);
    assert_eq!(
        bykov(&["conjugacy"], &cfg, dir.path()).status.code(),
        Some(1)
    );
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &PARAMS.replace(", \"a\": 0.5", ""));
    let out = bykov(&["simulate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.params.a"));

    let cfg = write_config(dir.path(), &PARAMS.replace("0.5}", "1.2}"));
    let out = bykov(&["simulate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a in (0,1) violated"));

    let out = bykov(&["simulate"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_prints_one_line_per_criterion() {
    let out = Command::new(env!("CARGO_BIN_EXE_bykov"))
        .arg("verify-all")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("criterion "))
        .collect();
    assert_eq!(lines.len(), 8, "{text}");
    let all_pass = lines.iter().all(|l| l.contains(" PASS "));
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 2 }));
}
