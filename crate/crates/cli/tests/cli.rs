#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::Request;
use esid_store::format::{METADATA_FILE, RESULTS_FILE};
use esid_store::{validate_format, Store};
use http_body_util::BodyExt;
use serde_json::Value;
use support::fixtures::{desk_graph, desk_scenario, lockdown};
use tower::ServiceExt;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// Graph and a 10-day scenario with a damping, as files.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("graph.json"), desk_graph().to_json()).unwrap();
        let mut s = desk_scenario("desk", 4);
        s.num_days = 10;
        s.dampings = vec![lockdown(0.4, 3, 8)];
        fs::write(dir.path().join("scenario.json"), serde_json::to_string_pretty(&s).unwrap()).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn esid(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_esid"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("ESID_STORE")
            .env_remove("ESID_GRAPH")
            .env_remove("ESID_BIND")
            .env_remove("ESID_CONFIG")
            .output()
            .unwrap()
    }

    fn scenario_with(&self, name: &str, edit: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(self.path("scenario.json")).unwrap()).unwrap();
        edit(&mut v);
        fs::write(self.path(name), serde_json::to_string(&v).unwrap()).unwrap();
        name.to_string()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_a_valid_directory() {
    let ws = Workspace::new();
    let o = ws.esid(&["run", "scenario.json", "--out", "out1", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["run_id"], "out1");
    assert!(summary["seconds"].as_f64().unwrap() >= 0.0);
    assert!(validate_format(&ws.path("out1")).is_valid());
    assert_eq!(code(&ws.esid(&["validate", "out1"])), 0);

    // same inputs, same values; only the timestamp differs
    assert_eq!(code(&ws.esid(&["run", "scenario.json", "--out", "out2"])), 0);
    let a = fs::read(ws.path("out1").join(RESULTS_FILE)).unwrap();
    let b = fs::read(ws.path("out2").join(RESULTS_FILE)).unwrap();
    assert_eq!(a, b);
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p.join(METADATA_FILE)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("created_at");
        v
    };
    assert_eq!(strip(&ws.path("out1")), strip(&ws.path("out2")));

    // flags override the file
    let o = ws.esid(&["run", "scenario.json", "--out", "out3", "--seed", "7", "--members", "2", "--json"]);
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((summary["seed"].as_u64(), summary["members"].as_u64()), (Some(7), Some(2)));
}

#[test]
fn toml_scenarios_are_accepted() {
    let ws = Workspace::new();
    let text = r##"
id = "toml-case"
name = "From TOML"
description = ""
color = "#000000"
start_date = "2021-03-01"
num_days = 5
graph = "graph.json"
members = 2
seed = 1

[[parameter_ranges]]
latent_days = { min = 3.0, max = 4.0 }
carrier_days = 3.0
infected_days = 7.0
severe_days = 8.0
critical_days = 10.0
symptomatic_fraction = 0.7
severe_fraction = 0.1
critical_fraction = 0.2
death_fraction = 0.3
transmission = { min = 0.03, max = 0.05 }
symptomatic_infectiousness = 0.5

[[dampings]]
locations = ["school", "work"]
strength = 0.5
start_day = 1
end_day = 4
"##;
    fs::write(ws.path("s.toml"), text).unwrap();
    let o = ws.esid(&["run", "s.toml", "--out", "t"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn run_validation_failures_exit_2() {
    let ws = Workspace::new();
    let bad = ws.scenario_with("bad.json", |v| v["dampings"][0]["strength"] = Value::from(2.0));
    let o = ws.esid(&["run", &bad, "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("dampings[0].strength"), "{}", stderr(&o));
    assert!(!ws.path("x").exists());

    let o = ws.esid(&["run", "scenario.json", "--graph", "missing.json", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("file not found"), "{}", stderr(&o));

    let o = ws.esid(&["run", "nope.json", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("file not found"));

    fs::write(ws.path("broken.json"), "{").unwrap();
    assert_eq!(code(&ws.esid(&["run", "broken.json", "--out", "x"])), 2);

    // clap usage errors share the code
    assert_eq!(code(&ws.esid(&["frobnicate"])), 2);
    assert_eq!(code(&ws.esid(&[])), 2);
    assert_eq!(code(&ws.esid(&["run", "scenario.json"])), 2, "no store and no --out");
}

#[test]
fn validate_exit_codes() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.esid(&["run", "scenario.json", "--out", "r"])), 0);
    let path = ws.path("r").join(RESULTS_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    lines[30]["values"][0][2] = Value::from(-3.0);
    let out: String = lines.iter().map(|l| format!("{l}\n")).collect();
    fs::write(&path, out).unwrap();

    let o = ws.esid(&["validate", "r"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("compartment C") && text.contains("value -3"), "{text}");

    let o = ws.esid(&["validate", "r", "--json"]);
    let report: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(report["violations"][0]["kind"], "negative");

    assert_eq!(code(&ws.esid(&["validate", "does-not-exist"])), 2);
}

#[test]
fn export_formats() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.esid(&["run", "scenario.json", "--out", "r"])), 0);
    let o = ws.esid(&["export", "r", "--district", "05315", "--compartment", "I"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("day,p5,p25,p50,p75,p95"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[10].starts_with("10,"));

    let o = ws.esid(&["export", "r", "--district", "05315", "--compartment", "I", "--format", "xml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unsupported format"));

    let o = ws.esid(&["export", "run-000042", "--store", "st", "--district", "05315", "--compartment", "I"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(code(&ws.esid(&["export", "r", "--district", "123", "--compartment", "I"])), 2);
}

#[tokio::test]
async fn export_matches_the_chart_endpoint() {
    let ws = Workspace::new();
    let o = ws.esid(&["run", "scenario.json", "--store", "st", "--graph", "graph.json", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["run_id"], "run-000001");

    let o = ws.esid(&[
        "export", "run-000001", "--store", "st", "--district", "05111", "--compartment", "H", "--group", "A60+",
        "--format", "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let exported: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let csv_out = ws.esid(&[
        "export", "run-000001", "--store", "st", "--district", "05111", "--compartment", "H", "--group", "A60+",
    ]);
    let mut reader = csv::Reader::from_reader(csv_out.stdout.as_slice());
    let csv_p95: Vec<f64> = reader.records().map(|r| r.unwrap()[5].parse().unwrap()).collect();

    let state = esid_api::AppState::new(Store::open(ws.path("st")).unwrap());
    let req = Request::get("/chart?compartment=H&district=05111&group=A60%2B").body(Body::empty()).unwrap();
    let resp = esid_api::router(state).oneshot(req).await.unwrap();
    let chart: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    let bundle = &chart["series"][0];
    for p in ["p5", "p25", "p50", "p75", "p95"] {
        assert_eq!(exported[p], bundle[p], "{p}");
    }
    let api_p95: Vec<f64> = bundle["p95"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(csv_p95, api_p95);
}

#[test]
fn store_workflow_and_config_precedence() {
    let ws = Workspace::new();
    fs::write(ws.path("esid.toml"), "store = \"from-config\"\ngraph = \"graph.json\"\n").unwrap();
    let o = ws.esid(&["--config", "esid.toml", "run", "scenario.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(ws.path("from-config/catalog.json").exists());

    // environment beats the config file, the flag beats both
    let o = Command::new(env!("CARGO_BIN_EXE_esid"))
        .args(["--config", "esid.toml", "search", "düss"])
        .env("ESID_STORE", ws.path("from-env"))
        .current_dir(ws.dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).trim().is_empty(), "fresh store has no districts");
    assert!(ws.path("from-env").is_dir());

    let o = Command::new(env!("CARGO_BIN_EXE_esid"))
        .args(["--config", "esid.toml", "--store", "from-config", "search", "düss", "--json"])
        .env("ESID_STORE", ws.path("from-env"))
        .current_dir(ws.dir.path())
        .output()
        .unwrap();
    let hits: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(hits[0]["id"], "05111");

    assert_eq!(code(&ws.esid(&["--config", "esid.toml", "search", " "])), 2);
    fs::write(ws.path("bad.toml"), "stor = 1\n").unwrap();
    assert_eq!(code(&ws.esid(&["--config", "bad.toml", "search", "a"])), 2);
    assert_eq!(code(&ws.esid(&["--config", "missing.toml", "search", "a"])), 2);
}

#[test]
fn ingest_reports_rows() {
    let ws = Workspace::new();
    fs::write(
        ws.path("cases.csv"),
        "date,county_id,age_group,confirmed,deaths,recovered\n\
         2021-03-01,05315,A00-A59,100,10,60\n\
         2021-13-01,05315,A00-A59,1,0,0\n",
    )
    .unwrap();
    let o = ws.esid(&["ingest", "cases.csv", "--store", "st", "--graph", "graph.json", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["accepted"], 1);
    assert_eq!(report["rejected"], 1);
    assert_eq!(report["errors"][0]["line"], 3);
    assert_eq!(report["errors"][0]["reason"], "invalid date");

    fs::write(ws.path("empty.csv"), "").unwrap();
    let o = ws.esid(&["ingest", "empty.csv", "--store", "st"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("empty input"));
}

#[test]
fn serve_rejects_bad_bind_address() {
    let ws = Workspace::new();
    let o = ws.esid(&["serve", "--store", "st", "--bind", "not-an-address"]);
    assert_eq!(code(&o), 2);
}
