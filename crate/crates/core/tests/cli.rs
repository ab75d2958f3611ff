use std::path::Path;
use std::process::Command;

use netconc::cli::run_with;
use netconc::graph::{Graph, SpinConfig};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["netconc"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn gen_complete_graph_matches_canonical_text() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "gen.json",
        r#"{"ensemble":{"variant":"er_dense","params":{"n":3,"p":1.0}}}"#,
    );
    let out = tmp.path().join("out");
    let (code, _, err) = run(&["gen", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        read(out.join("graph_0.edgelist")),
        Graph::complete(3).to_edge_list_string()
    );
    assert_eq!(read(out.join("graph_0.edgelist")), "3 3\n0 1\n0 2\n1 2\n");
    let manifest: Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["subcommand"], "gen");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["netconc_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn eval_triangle_prints_minus_two() {
    let tmp = tempfile::tempdir().unwrap();
    Graph::complete(3)
        .save_edge_list(tmp.path().join("k3.edgelist"))
        .unwrap();
    std::fs::write(
        tmp.path().join("s.txt"),
        SpinConfig::new(vec![1, 1, 1], 2).unwrap().to_label_lines(),
    )
    .unwrap();
    let cfg = write(
        tmp.path(),
        "eval.json",
        r#"{"graph":"k3.edgelist","labels":"s.txt","functional":{"kind":"bipartition"}}"#,
    );
    let out = tmp.path().join("out");
    let (code, stdout, err) = run(&["eval", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.trim(), "-2");
    let v: Value = serde_json::from_str(&read(out.join("eval.json"))).unwrap();
    assert_eq!(v["value"], -2.0);
}

#[test]
fn bounds_table_for_t1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "b.json",
        r#"{"bound":{"theorem":"T1","params":{"c":1}},"ts":[0,1]}"#,
    );
    let out = tmp.path().join("out");
    let (code, stdout, err) = run(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = read(out.join("bounds.csv"));
    assert_eq!(csv, stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,raw,clamped");
    assert_eq!(lines[1], "0,2,1");
    let row: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    let e = 2.0 * (-1.0f64).exp();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - e).abs() < 1e-15 && (row[2] - e).abs() < 1e-15);
    assert!((row[1] - 0.73576).abs() < 1e-5);
}

#[test]
fn bounds_with_free_mu_adds_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "b.json",
        r#"{"bound":{"theorem":"T6","params":{"n":100,"p":0.05}},"ts":[0.1],"optimize_mu":true}"#,
    );
    let out = tmp.path().join("out");
    let (code, stdout, err) = run(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("t,raw,clamped,mu\n"));
}

#[test]
fn opt_writes_labels_and_result() {
    let tmp = tempfile::tempdir().unwrap();
    let g = Graph::from_edge_list(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap();
    g.save_edge_list(tmp.path().join("g.edgelist")).unwrap();
    let cfg = write(
        tmp.path(),
        "opt.json",
        r#"{"graph":"g.edgelist","functional":{"kind":"modularity"},"optimizer":{"method":"exhaustive"}}"#,
    );
    let out = tmp.path().join("out");
    let (code, _, err) = run(&["opt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let labels = SpinConfig::parse_label_lines(&read(out.join("labels.txt")), 2).unwrap();
    assert_eq!(labels.labels(), &[0, 0, 0, 1, 1, 1]);
    let v: Value = serde_json::from_str(&read(out.join("result.json"))).unwrap();
    assert_eq!(v["exact"], true);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "gen.json",
        r#"{"ensemble":{"variant":"er_sparse","params":{"n":40,"lambda":3.0}},"seed":1}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&["gen", "--config", &cfg, "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(
        run(&["gen", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "2"]).0,
        0
    );
    let mb: Value = serde_json::from_str(&read(b.join("manifest.json"))).unwrap();
    assert_eq!(mb["seed"], 2);
    assert_eq!(mb["config"]["seed"], 2);
    assert_ne!(read(a.join("graph_0.edgelist")), read(b.join("graph_0.edgelist")));
}

#[test]
fn fit_reads_scaling_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let rows: String = [10.0f64, 20.0, 40.0]
        .iter()
        .map(|n| format!("{n},{},\n", n.powf(-0.5)))
        .collect();
    std::fs::write(tmp.path().join("scaling.csv"), format!("N,std,fit\n{rows}")).unwrap();
    let cfg = write(tmp.path(), "fit.json", r#"{"csv":"scaling.csv"}"#);
    let out = tmp.path().join("out");
    let (code, stdout, err) = run(&["fit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("slope="));
    let v: Value = serde_json::from_str(&read(out.join("fit.json"))).unwrap();
    assert!((v["slope"].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

fn error_json(stderr: &str) -> Value {
    let line = stderr.lines().last().unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn schema_violations_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = write(tmp.path(), "bad.json", r#"{"bound":{"theorem":"T99"},"ts":[0]}"#);
    let (code, _, err) = run(&["bounds", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(error_json(&err)["error"], "config");
    assert!(!out.exists(), "nothing is written for an invalid config");

    let unknown = write(
        tmp.path(),
        "u.json",
        r#"{"bound":{"theorem":"T1","params":{"c":1}},"ts":[0],"extra":1}"#,
    );
    assert_eq!(
        run(&["bounds", "--config", &unknown, "--out", out.to_str().unwrap()]).0,
        2
    );

    let few = write(
        tmp.path(),
        "c.json",
        r#"{"ensemble":{"variant":"er_dense","params":{"p":0.5}},"ns":[4],"functional":{"kind":"bipartition"},
            "optimizer":{"method":"exhaustive"},"replicates":1}"#,
    );
    let (code, _, err) = run(&["concentrate", "--config", &few, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(error_json(&err)["message"].as_str().unwrap().contains("replicates"));

    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(error_json(&err)["error"], "config");
}

#[test]
fn runtime_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write(
        tmp.path(),
        "eval.json",
        r#"{"graph":"missing.edgelist","labels":"missing.txt","functional":{"kind":"bipartition"}}"#,
    );
    let (code, _, err) = run(&["eval", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(error_json(&err)["error"], "io");

    Graph::empty(3).save_edge_list(tmp.path().join("e.edgelist")).unwrap();
    std::fs::write(tmp.path().join("s.txt"), "0\n0\n0\n").unwrap();
    let cfg = write(
        tmp.path(),
        "m.json",
        r#"{"graph":"e.edgelist","labels":"s.txt","functional":{"kind":"modularity"}}"#,
    );
    let (code, _, err) = run(&["eval", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(error_json(&err)["error"], "degenerate");
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "gen",
        "eval",
        "opt",
        "bounds",
        "concentrate",
        "gamma-sweep",
        "fit",
        "replay",
    ] {
        assert!(stdout.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "fit.json", r#"{"points":[[10,1.0],[20,0.5],[40,0.25]]}"#);
    let out = tmp.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_netconc"))
        .args(["fit", "--config", &cfg])
        .env("NETCONC_OUT", &out)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("fit.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn binary_reports_errors_as_json() {
    let o = Command::new(env!("CARGO_BIN_EXE_netconc"))
        .args(["eval", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v = error_json(&String::from_utf8_lossy(&o.stderr));
    assert_eq!(v["error"], "io");
}

#[test]
fn shipped_example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = read(&path);
        let v: Value = serde_json::from_str(&text).unwrap();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let ok = match name.split('_').next().unwrap() {
            "gen" => serde_json::from_value::<netconc::cli::GenConfig>(v).is_ok(),
            "eval" => serde_json::from_value::<netconc::cli::EvalConfig>(v).is_ok(),
            "opt" => serde_json::from_value::<netconc::cli::OptConfig>(v).is_ok(),
            "bounds" => serde_json::from_value::<netconc::cli::BoundsConfig>(v).is_ok(),
            "concentrate" => serde_json::from_value::<netconc::experiments::ExperimentConfig>(v).is_ok(),
            "gamma" => serde_json::from_value::<netconc::cli::GammaSweepConfig>(v).is_ok(),
            "fit" => serde_json::from_value::<netconc::cli::FitConfig>(v).is_ok(),
            other => panic!("unexpected config {other}"),
        };
        assert!(ok, "{} does not parse", path.display());
        seen += 1;
    }
    assert!(seen >= 7);
}
