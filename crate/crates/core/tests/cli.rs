use std::fs;
use std::process::{Command, Output};

fn kg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgcoherent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_one_has_six_columns_of_two_cells() {
    let o = kg(&["free", "--table", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("p_mean[mc],lambda,E_mean/E_cl,E_mean/E_cl paper"));
    for l in &lines[1..] {
        let cells: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[4] < 1e-4 && cells[8] < 1e-4, "{l}");
    }
}

#[test]
fn output_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let common = ["free", "--observable", "density", "--tau-stop", "10", "--tau-step", "5", "--x-start", "-5", "--x-stop", "15", "--x-step", "0.5"];
    let mut args_a = vec!["--threads", "1", "--out", a.to_str().unwrap()];
    args_a.extend(common);
    let mut args_b = vec!["--threads", "4", "--out", b.to_str().unwrap()];
    args_b.extend(common);
    assert_eq!(kg(&args_a).status.code(), Some(0));
    assert_eq!(kg(&args_b).status.code(), Some(0));
    let fa = fs::read(a.join("free_density.csv")).unwrap();
    let fb = fs::read(b.join("free_density.csv")).unwrap();
    assert_eq!(fa, fb);
    assert_eq!(String::from_utf8(fa).unwrap().lines().count(), 1 + 3 * 41);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"free": {"lambda": 0.5, "p_mean": 1.0}}"#).unwrap();
    let from_file = stdout(&kg(&["--config", cfg.to_str().unwrap(), "free", "--observable", "vdot"]));
    let v: f64 = from_file.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((v - 0.6903).abs() < 5e-4);
    let flagged = stdout(&kg(&["--config", cfg.to_str().unwrap(), "free", "--observable", "vdot", "--p-mean", "2", "--lambda", "1"]));
    let v: f64 = flagged.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((v - 0.8786).abs() < 5e-4);
}

#[test]
fn exit_codes() {
    assert_eq!(kg(&["free", "--tau-start", "3", "--tau-stop", "1"]).status.code(), Some(2));
    assert_eq!(kg(&["free", "--tau-step", "0"]).status.code(), Some(2));
    assert_eq!(kg(&["nonsense"]).status.code(), Some(2));
    assert_eq!(kg(&["--config", "/nonexistent/run.json", "free"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"free": {"lambda": "wide"}}"#).unwrap();
    assert_eq!(kg(&["--config", bad.to_str().unwrap(), "free"]).status.code(), Some(2));
    let capped = dir.path().join("capped.json");
    fs::write(&capped, r#"{"series": {"n_max": 10, "ell_max": 10}}"#).unwrap();
    let o = kg(&["--config", capped.to_str().unwrap(), "magnetic", "--table", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_max"));
}

#[test]
fn magnetic_products() {
    let o = kg(&["magnetic", "--table", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 13);
    let o = kg(&["magnetic", "--check", "gyration-center"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("true"));
    let o = kg(&["magnetic", "--fig", "helix", "--tau-stop", "0.5", "--tau-step", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 3);
    let o = kg(&["magnetic", "--observable", "uncertainty", "--tau-stop", "1", "--tau-step", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = kg(&["magnetic", "--p1", "1", "--total", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn neutral_reality_check_and_validate() {
    let o = kg(&["neutral", "--reality-check", "--alpha", "-1.5", "--p-mean", "-0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let o = kg(&["--out", dir.path().to_str().unwrap(), "validate", "--tables"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 failed\n"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("validation.json")).unwrap()).unwrap();
    assert!(json.is_object() || json.is_array());
}
