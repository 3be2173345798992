use std::path::Path;
use std::process::{Command, Output};

fn bosonet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosonet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn fidelity_column(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.records().map(|row| row.unwrap()[1].parse().unwrap()).collect()
}

const BELL: &str = r#"{"scenario": "bell", "rates": {"gamma0": 25}, "t_final": 3}"#;

#[test]
fn run_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bell.json", BELL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bosonet(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# bosonet-cli "));
    assert!(lines[1].starts_with("# metadata: {"));
    assert_eq!(lines[2], "t_gamma,fidelity,purity,n_mode_1,n_mode_2");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", BELL);
    assert_eq!(bosonet(&["validate-config", "--config", &good]).status.code(), Some(0));

    let unknown = write(dir.path(), "unknown.json", r#"{"scenario": "bell", "rates": {"gamma0": 1}, "gama": 2}"#);
    let o = bosonet(&["validate-config", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));

    let negative = write(dir.path(), "neg.json", r#"{"scenario": "bell", "rates": {"gamma0": -1}}"#);
    let o = bosonet(&["run", "--config", &negative]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma0"));

    let missing = dir.path().join("nope.json");
    assert_eq!(bosonet(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(bosonet(&["run"]).status.code(), Some(2));
}

#[test]
fn colder_bath_leads_after_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bell.json", BELL);
    let out = dir.path().join("sweep");
    let o = bosonet(&[
        "sweep", "--config", &cfg, "--param", "nbar", "--values", "0,0.05", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cold = fidelity_column(&out.join("nbar_0.csv"));
    let warm = fidelity_column(&out.join("nbar_0.05.csv"));
    // the vacuum has no overlap with the target, the thermal start does
    assert!(cold[0] < warm[0]);
    // the cold run stops early once stationary; it holds its last value
    let last = *cold.last().unwrap();
    assert!(cold.len() < warm.len());
    for (k, w) in warm.iter().enumerate().skip(1) {
        let c = cold.get(k).copied().unwrap_or(last);
        assert!(c > *w, "k = {k}: {c} vs {w}");
    }
}

#[test]
fn warm_start_leads_only_briefly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bell.json",
        r#"{"scenario": "bell", "rates": {"gamma0": 25}, "t_final": 0.05, "output_interval": 0.0005, "steady_state": false}"#,
    );
    let out = dir.path().join("sweep");
    let o = bosonet(&[
        "sweep", "--config", &cfg, "--param", "nbar", "--values", "0,0.05", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let cold = fidelity_column(&out.join("nbar_0.csv"));
    let warm = fidelity_column(&out.join("nbar_0.05.csv"));
    let crossing = cold.iter().zip(&warm).position(|(c, w)| c > w).unwrap();
    let t = crossing as f64 * 0.0005;
    assert!(t > 0.02 && t < 0.03, "{t}");
    assert!(cold[crossing..].iter().zip(&warm[crossing..]).all(|(c, w)| c > w));
}

#[test]
fn design_rows_follow_the_tuning_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "design.json", r#"{"omega0": 5e5, "gamma": 7.5, "n_max": 1}"#);
    let o = bosonet(&["design", "--config", &cfg, "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rates = v["rates"].as_array().unwrap();
    let w = |i: usize| rates[i]["omega1_abs"].as_f64().unwrap();
    assert!((w(1) / w(0) - 2f64.sqrt()).abs() < 1e-12);

    let text = bosonet(&["design", "--config", &cfg]);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("regime checks"));
}
