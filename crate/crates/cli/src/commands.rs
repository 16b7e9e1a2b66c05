use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::time::Instant;

use esid_core::ensemble::{percentile_index, run_ensemble, ScenarioDefinition, SimulationResult, PERCENTILES};
use esid_core::graph::GraphModel;
use esid_core::model::Compartment;
use esid_store::format::METADATA_FILE;
use esid_store::{load_result, save_result, validate_format, Store, StoreError};
use serde::Serialize;

use crate::config::Settings;
use crate::{io_reason, CliError, ExportArgs, IngestArgs, RunArgs};

#[derive(Debug, Clone, Copy)]
pub struct Output {
    pub json: bool,
}

impl Output {
    fn emit<T: Serialize>(self, value: &T, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string(value).expect("output serializes"));
        } else {
            println!("{}", text());
        }
    }
}

fn store_error(e: StoreError) -> CliError {
    match &e {
        StoreError::Model(inner) if inner.field().is_some() => CliError::usage(e.to_string()),
        StoreError::QueryTooShort | StoreError::CaseData(_) => CliError::usage(e.to_string()),
        StoreError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
            CliError::usage(e.to_string())
        }
        _ => CliError::runtime(e.to_string()),
    }
}

fn read_text(what: &str, path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{what} {}: {}", path.display(), io_reason(&e))))
}

fn read_scenario(path: &Path) -> Result<ScenarioDefinition, CliError> {
    let text = read_text("scenario", path)?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::usage(format!("scenario {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<GraphModel, CliError> {
    let text = read_text("graph", path)?;
    GraphModel::from_json(&text).map_err(|e| CliError::usage(format!("graph {}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunSummary {
    run_id: String,
    scenario_id: String,
    path: String,
    members: u32,
    seed: u64,
    seconds: f64,
}

pub fn run(args: &RunArgs, settings: &Settings, out: Output) -> Result<(), CliError> {
    let mut scenario = read_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(k) = args.members {
        scenario.members = k;
    }
    let started = Instant::now();

    let (run_id, path) = if let Some(dir) = &args.out {
        // graph from the flag, else next to the scenario file
        let graph_path = match &settings.graph {
            Some(p) => p.clone(),
            None => args.scenario.parent().unwrap_or(Path::new(".")).join(&scenario.graph),
        };
        let graph = read_graph(&graph_path)?;
        scenario
            .validate(graph.num_groups())
            .map_err(|e| CliError::usage(format!("scenario {}: {e}", args.scenario.display())))?;
        let result = run_ensemble(&scenario, &graph).map_err(|e| CliError::runtime(e.to_string()))?;
        save_result(&result, dir).map_err(|e| CliError::runtime(e.to_string()))?;
        let id = dir.file_name().map_or_else(|| scenario.id.clone(), |n| n.to_string_lossy().into_owned());
        (id, dir.clone())
    } else {
        let mut store = Store::open(settings.store()?).map_err(store_error)?;
        if let Some(graph_path) = &settings.graph {
            let graph = read_graph(graph_path)?;
            store.import_graph(&scenario.graph, &graph).map_err(store_error)?;
        }
        store.load_graph(&scenario.graph).map_err(|e| match e {
            StoreError::NotFound { .. } => CliError::usage(format!(
                "graph '{}': file not found in store (pass --graph)",
                scenario.graph
            )),
            e => store_error(e),
        })?;
        store.put_scenario(scenario.clone()).map_err(store_error)?;
        let id = store.execute(&scenario.id).map_err(|e| match e {
            StoreError::Model(inner) => CliError::runtime(inner.to_string()),
            e => store_error(e),
        })?;
        let path = store.run_dir(&id);
        (id, path)
    };

    let summary = RunSummary {
        run_id,
        scenario_id: scenario.id.clone(),
        path: path.display().to_string(),
        members: scenario.members,
        seed: scenario.seed,
        seconds: started.elapsed().as_secs_f64(),
    };
    out.emit(&summary, || {
        format!(
            "run {} of {} ({} members) written to {} in {:.2}s",
            summary.run_id, summary.scenario_id, summary.members, summary.path, summary.seconds
        )
    });
    Ok(())
}

pub fn serve(settings: &Settings) -> Result<(), CliError> {
    let store = Store::open(settings.store()?).map_err(store_error)?;
    let bind = settings.bind.as_deref().unwrap_or(esid_api::DEFAULT_BIND);
    let addr: SocketAddr = bind
        .parse()
        .map_err(|e| CliError::usage(format!("bind address '{bind}': {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::runtime(e.to_string()))?;
    rt.block_on(async {
        let state = esid_api::AppState::new(store);
        esid_api::serve(state, addr).await
    })
    .map_err(|e| CliError::runtime(format!("serve {addr}: {e}")))
}

pub fn ingest(args: &IngestArgs, settings: &Settings, out: Output) -> Result<(), CliError> {
    let mut store = Store::open(settings.store()?).map_err(store_error)?;
    if let Some(graph_path) = &settings.graph {
        let graph = read_graph(graph_path)?;
        let name = graph_path
            .file_name()
            .map_or_else(|| "graph.json".to_string(), |n| n.to_string_lossy().into_owned());
        store.import_graph(&name, &graph).map_err(store_error)?;
    }
    let file = fs::File::open(&args.file)
        .map_err(|e| CliError::usage(format!("{}: {}", args.file.display(), io_reason(&e))))?;
    let report = store.ingest_cases(file).map_err(store_error)?;
    for e in &report.errors {
        if !out.json {
            eprintln!("{}:{}: {}", args.file.display(), e.line, e.reason);
        }
    }
    out.emit(&report, || {
        format!(
            "accepted {}, rejected {}, duplicates {}; store holds {} records",
            report.accepted,
            report.rejected,
            report.duplicates,
            store.cases().len()
        )
    });
    Ok(())
}

pub fn validate(path: &Path, out: Output) -> Result<(), CliError> {
    if !path.is_dir() {
        return Err(CliError::usage(format!("{}: not a readable result directory", path.display())));
    }
    let report = validate_format(path);
    out.emit(&report, || {
        if report.is_valid() {
            format!("ok: {} records", report.records)
        } else {
            report.violations.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("\n")
        }
    });
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::runtime(format!("{} violations", report.violations.len())))
    }
}

#[derive(Serialize)]
struct Export {
    scenario_id: String,
    district: String,
    group: String,
    compartment: Compartment,
    day: Vec<u32>,
    date: Vec<chrono::NaiveDate>,
    p5: Vec<f64>,
    p25: Vec<f64>,
    p50: Vec<f64>,
    p75: Vec<f64>,
    p95: Vec<f64>,
}

fn resolve_run(run: &str, settings: &Settings) -> Result<SimulationResult, CliError> {
    let dir = Path::new(run);
    if dir.join(METADATA_FILE).is_file() {
        return load_result(dir).map_err(|e| CliError::runtime(e.to_string()));
    }
    let store = Store::open(settings.store()?).map_err(store_error)?;
    store
        .load_run(run)
        .map_err(|e| CliError::runtime(format!("run '{run}': {e}")))
}

pub fn export(args: &ExportArgs, settings: &Settings) -> Result<(), CliError> {
    let format = args.format.to_ascii_lowercase();
    if format != "csv" && format != "json" {
        return Err(CliError::usage(format!("unsupported format '{}'", args.format)));
    }
    let c: Compartment = args.compartment.parse().map_err(|e: esid_core::Error| CliError::usage(e.to_string()))?;
    let result = resolve_run(&args.run, settings)?;
    let meta = &result.metadata;
    let d = meta
        .district_slot(&args.district)
        .ok_or_else(|| CliError::usage(format!("unknown district '{}'", args.district)))?;
    let g = meta
        .group_slot(&args.group)
        .ok_or_else(|| CliError::usage(format!("unknown age group '{}'", args.group)))?;
    let band = |q: u8| result.series(percentile_index(q).expect("stored percentile"), d, g, c);
    let data = Export {
        scenario_id: meta.scenario_id.clone(),
        district: args.district.clone(),
        group: args.group.clone(),
        compartment: c,
        day: (0..=meta.num_days).collect(),
        date: (0..=meta.num_days).map(|t| meta.date_of(t)).collect(),
        p5: band(5),
        p25: band(25),
        p50: band(50),
        p75: band(75),
        p95: band(95),
    };

    let mut buf = Vec::new();
    if format == "json" {
        serde_json::to_writer_pretty(&mut buf, &data).expect("export serializes");
        buf.push(b'\n');
    } else {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["day".to_string()];
        header.extend(PERCENTILES.iter().map(|p| format!("p{p}")));
        w.write_record(&header).map_err(|e| CliError::runtime(e.to_string()))?;
        for (i, day) in data.day.iter().enumerate() {
            let row = [day.to_string()]
                .into_iter()
                .chain([&data.p5, &data.p25, &data.p50, &data.p75, &data.p95].map(|s| s[i].to_string()));
            w.write_record(row).map_err(|e| CliError::runtime(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::runtime(e.to_string()))?;
    }
    match &args.out {
        Some(path) => fs::write(path, buf).map_err(|e| CliError::runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::runtime(e.to_string())),
    }
}

pub fn search(query: &str, settings: &Settings, out: Output) -> Result<(), CliError> {
    let store = Store::open(settings.store()?).map_err(store_error)?;
    let matches = store.search(query).map_err(store_error)?;
    out.emit(&matches, || {
        matches.iter().map(|m| format!("{}\t{}", m.id, m.name)).collect::<Vec<_>>().join("\n")
    });
    Ok(())
}
