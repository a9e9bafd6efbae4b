use std::process::{Command, Output};

use serde_json::Value;

const GAME: [&str; 6] = ["--h", "2", "--e", "0.5", "--i", "0.5"];

fn broodsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_broodsim")).args(args).output().expect("binary runs")
}

fn with_game<'a>(sub: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![sub];
    v.extend(GAME);
    v.extend(rest);
    v
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exit_code_success() {
    let json: Value = serde_json::from_str(&stdout(&broodsim(&with_game("ne", &[])))).unwrap();
    assert_eq!(json["p_s"], 0.25);
    assert_eq!(json["p_i"], 0.25);
    assert_eq!(json["p_c"], 0.5);
    assert_eq!(json["payoff"], 1.0);
}

#[test]
fn exit_code_usage() {
    let out = broodsim(&["ne", "--h", "2", "--e", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(broodsim(&with_game("estimate", &[])).status.code(), Some(1));
    assert_eq!(broodsim(&with_game("ne", &["--format", "xml"])).status.code(), Some(1));
    assert_eq!(broodsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn exit_code_domain() {
    let out = broodsim(&["ne", "--h", "1", "--e", "0.6", "--i", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no interior equilibrium"));
    assert_eq!(broodsim(&with_game("field", &["--spacing", "1"])).status.code(), Some(2));
    assert_eq!(broodsim(&with_game("simulate", &["--gens", "1", "--seed", "1", "--mu", "2"])).status.code(), Some(2));
}

#[test]
fn exit_code_io() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("ne.json");
    let out = broodsim(&with_game("ne", &["--out", path.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analytic_field_lattice() {
    let text = stdout(&broodsim(&with_game("field", &["--source", "analytic", "--spacing", "15"])));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p_s,p_i,p_c,v_s,v_i,v_c,source,reps");
    assert_eq!(lines.len(), 1 + 136);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        let sum: f64 = cells[..3].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        assert_eq!(cells[6..], ["analytic", "0"]);
    }

    let text = stdout(&broodsim(&with_game("field", &["--spacing", "4"])));
    let row = text.lines().find(|l| l.starts_with("0.5,0.25,0.25,")).unwrap();
    let v: Vec<f64> = row.split(',').skip(3).take(3).map(|c| c.parse().unwrap()).collect();
    assert!((v[0] - 0.041667).abs() < 1e-6);
    assert!((v[1] + 0.0625).abs() < 1e-6);
    assert!((v[2] - 0.020833).abs() < 1e-6);
}

#[test]
fn field_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let args = ["--source", "both", "--spacing", "10", "--n", "300", "--reps", "150", "--seed", "7"];
        let mut args = with_game("field", &args);
        args.extend(["--workers", workers, "--out", path.to_str().unwrap()]);
        assert!(broodsim(&args).status.success());
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv", "1");
    assert_eq!(first, run("b.csv", "1"));
    assert_eq!(first, run("c.csv", "4"));
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 66);
    let sources: Vec<&str> = text.lines().skip(1).take(2).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(sources, ["analytic", "abm"]);
}

#[test]
fn simulate_rows() {
    let header = "gen,p_s,p_i,p_c,mean_u_s,mean_u_i,mean_u_c\n";
    assert_eq!(stdout(&broodsim(&with_game("simulate", &["--n", "300", "--gens", "0", "--seed", "1"]))), header);
    let text = stdout(&broodsim(&with_game("simulate", &["--n", "300", "--gens", "5", "--seed", "1"])));
    assert!(text.starts_with(header));
    let gens: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(gens, ["1", "2", "3", "4", "5"]);
}

#[test]
fn estimate_reports_z_scores() {
    let text = stdout(&broodsim(&with_game("estimate", &["--point", "1,0,0", "--n", "100", "--reps", "20", "--seed", "2"])));
    assert_eq!(text, "type,count,reps,mean,stderr,analytic,z\nsitter,100,20,1.5,0,1.5,0\n");

    let text = stdout(&broodsim(&with_game("estimate", &["--n", "200", "--reps", "200", "--seed", "2"])));
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[5], "1");
        assert!(cells[6].parse::<f64>().unwrap().abs() < 4.0, "{line}");
    }
}

#[test]
fn converge_json_has_slope() {
    let args = ["--n", "200", "--reps", "50,100,200,400", "--seed", "9", "--format", "json"];
    let json: Value = serde_json::from_str(&stdout(&broodsim(&with_game("converge", &args)))).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);
    assert!(json["stderr_slope"]["i"].is_null());
    let slope = json["stderr_slope"]["s"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.2);
}

#[test]
fn ess_report() {
    let args = ["--seed", "3", "--n", "100", "--reps", "20", "--target", "20"];
    let json: Value = serde_json::from_str(&stdout(&broodsim(&with_game("ess", &args)))).unwrap();
    assert_eq!(json["ess_found"], false);
    let interior: Vec<&Value> = json["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["interior"] == true)
        .collect();
    assert_eq!(interior.len(), 1);
    let c = interior[0];
    assert!((c["location"]["p_c"].as_f64().unwrap() - 0.5).abs() < 0.01);
    assert_eq!(c["classification"], "unstable-spiral");
    assert!(c["eigenvalues"][0]["re"].as_f64().unwrap() > 0.0);
    assert_eq!(json["trace"].as_array().unwrap().len(), 2);
}

#[test]
fn payoffs_csv() {
    let text = stdout(&broodsim(&with_game("payoffs", &["--point", "0.5,0.25,0.25"])));
    assert_eq!(text, "p_s,p_i,p_c,u_s,u_i,u_c\n0.5,0.25,0.25,1.33333333,1,1.33333333\n");
}
