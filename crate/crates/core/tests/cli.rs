use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tropmetzler"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn graph() -> String {
    fixture("example_graph.json").display().to_string()
}

#[test]
fn eval_prints_exact_values() {
    let o = run(&["eval", &graph(), "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Vec<String> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, ["4/3", "6283185307/1000000000", "0/1"]);

    let op = fixture("example_operator.json").display().to_string();
    let o2 = run(&["eval", &op, "--point", "0,0,0"]);
    assert_eq!(stdout(&o2), stdout(&o));
}

#[test]
fn subfixed_reports_both_outcomes() {
    for (point, want) in [("0,0,0", true), ("-3,0,0", true), ("2,0,0", false)] {
        let o = run(&["subfixed", &graph(), "--point", point]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["subfixed"], want, "{point}");
    }
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["eval", bad.to_str().unwrap(), "--point", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = run(&["eval", &graph(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["eval", &graph(), "--point", "0,x,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["eval", "/nonexistent/graph.json", "--point", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_graph_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(
        &path,
        r#"{"min":[1,2],"max":[3],"random":[],"edges":[
            {"id":1,"tail":1,"head":2,"payoff":"0/1","prob":null},
            {"id":2,"tail":2,"head":3,"payoff":"0/1","prob":null},
            {"id":3,"tail":3,"head":1,"payoff":"0/1","prob":null}]}"#,
    )
    .unwrap();
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["min_paths_meet_max"], false);

    let o = run(&["eval", path.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_is_byte_deterministic() {
    let args = ["verify", &graph(), "--samples", "60", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report["samples"], 60);
    assert!(report.get("wall_time_ms").is_none());
    assert!(report["counterexample"].is_null());

    let timed = run(&["verify", &graph(), "--samples", "5", "--timing"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&timed)).unwrap();
    assert!(report["wall_time_ms"].is_u64());
}

#[test]
fn section_is_stable_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("section.csv");
    let args = [
        "section",
        &graph(),
        "--fix",
        "3=0",
        "--lo",
        "-3",
        "--hi",
        "3",
        "--step",
        "1/2",
    ];
    let o = run(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(stdout(&run(&args)), written);
    let header = written.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 14);
    assert!(header.contains(",-1.5,") && header.contains(",2.5,"));

    let o = run(&["section", &graph(), "--step", "1"]);
    assert_eq!(o.status.code(), Some(2), "three free coordinates");
}

#[test]
fn transform_output_is_a_valid_graph() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["zp", "t1", "pipeline"] {
        let o = run(&["transform", kind, &graph()]);
        assert_eq!(o.status.code(), Some(0), "{kind}");
        let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(doc["witness"]["kind"], kind);
        let path = dir.path().join(format!("{kind}.json"));
        std::fs::write(&path, doc["graph"].to_string()).unwrap();
        let v = run(&["validate", path.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{kind}");
    }
    let t1 = dir.path().join("t1.json");
    let o = run(&["transform", "t2", t1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "t2 without an edge");
}

#[test]
fn synthesize_then_member() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cone.json");
    let o = run(&["synthesize", &graph(), "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["visible"], 3);
    let vars = doc["n"].as_u64().unwrap() as usize;

    let lift = run(&["lift", &graph(), "--point", "0,0,0"]);
    let lifted: serde_json::Value = serde_json::from_str(&stdout(&lift)).unwrap();
    assert_eq!(lifted["member"], true);
    let point: Vec<String> = lifted["lifted"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(point.len(), vars);
    let o = run(&[
        "member",
        path.to_str().unwrap(),
        "--point",
        &point.join(","),
    ]);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["member"], true);

    let o = run(&["member", path.to_str().unwrap(), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}
