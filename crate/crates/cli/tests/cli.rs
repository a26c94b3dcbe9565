use std::process::Command;

fn fredholm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fredholm")).args(args).output().unwrap()
}

#[test]
fn problems_list_names_every_problem() {
    let out = fredholm(&["problems", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, ["baart", "foxgood", "gravity", "shaw", "wing", "blur2d"]);
}

#[test]
fn solve_prints_a_json_report() {
    let out = fredholm(&["solve", "--problem", "baart", "--method", "tsve", "--alpha", "1e-2", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 3);
    assert!(v["re"].as_f64().unwrap() > 0.0);
    assert!(v["bound_lhs"].as_f64().unwrap() <= v["bound_rhs"].as_f64().unwrap());
    assert!(v["residual"].as_f64().unwrap() <= v["delta"].as_f64().unwrap());
    assert!(v["timings"]["setup_ms"].as_f64().is_some());
}

#[test]
fn sve_and_oracle_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = fredholm(&["sve", "--problem", "baart", "--out", d]);
    assert!(out.status.success());
    let sig = std::fs::read_to_string(dir.path().join("baart_sigmas.csv")).unwrap();
    assert!(sig.starts_with("index,sigma\n1,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("baart_sve.json")).unwrap()).unwrap();
    assert_eq!(json["sigmas"].as_array().unwrap().len(), sig.lines().count() - 1);
    assert!(json["phis"][0]["coeffs"].is_array());

    let out = fredholm(&["oracle", "--problem", "baart", "--n", "200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("index,sigma,sigma_discrete,rel_diff"));
}

#[test]
fn bad_input_gives_nonzero_exit() {
    assert_eq!(fredholm(&["solve", "--problem", "nope"]).status.code(), Some(2));
    assert_eq!(fredholm(&["solve", "--problem", "baart", "--eta", "0.5"]).status.code(), Some(2));
    assert!(!fredholm(&["frobnicate"]).status.success());
}

#[test]
fn bench_with_config_file_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"problems":["wing"],"alphas":[0.01],"methods":["tsve"],"seeds":[1,2],
            "eta":1.0,"cutoff_eps":1e-10,"aca_tol":1e-13,"output_dir":{:?}}}"#,
            dir.path().join("out")
        ),
    )
    .unwrap();
    let out = fredholm(&["bench", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
