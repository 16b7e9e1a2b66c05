//! On-disk catalog of scenarios, runs, districts and case data.
//!
//! Layout under the store root:
//!
//! ```text
//! catalog.json          scenarios, runs, district registry
//! cases.csv             ingested case records, canonical order
//! graphs/<name>         district graph documents
//! runs/<run id>/        result directories
//! ```

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fs;
use std::hash::{Hash, Hasher};
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use esid_core::ensemble::{is_valid_id, ScenarioDefinition, SimulationResult};
use esid_core::graph::GraphModel;
use esid_core::model::AgeGroupSpec;
use serde::{Deserialize, Serialize};

use crate::cases::{ingest_case_data, merge_records, write_case_csv, CaseRecord, IngestReport};
use crate::error::{Result, StoreError};
use crate::format::{load_result, save_result};
use crate::registry::{DistrictMatch, DistrictRegistry};

pub const CATALOG_FILE: &str = "catalog.json";
pub const CASES_FILE: &str = "cases.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub definition: ScenarioDefinition,
    /// Run ids in creation order.
    #[serde(default)]
    pub runs: Vec<String>,
    /// Scenario this one was derived from by a triggered run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub scenario_id: String,
    pub status: RunStatus,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreCatalog {
    pub scenarios: BTreeMap<String, ScenarioEntry>,
    pub runs: BTreeMap<String, RunEntry>,
    pub districts: DistrictRegistry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_groups: Option<AgeGroupSpec>,
    #[serde(default)]
    next_run: u64,
}

/// Scenario store rooted at a directory. Writers need `&mut`; callers
/// sharing a store across threads wrap it in a lock.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    catalog: StoreCatalog,
    cases: Vec<CaseRecord>,
}

impl Store {
    /// Opens the store at `root`, creating an empty one if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for dir in [root.clone(), root.join("graphs"), root.join("runs")] {
            fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        }
        let path = root.join(CATALOG_FILE);
        let catalog = if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
            serde_json::from_str(&text).map_err(|e| StoreError::json(&path, e))?
        } else {
            StoreCatalog::default()
        };
        let cases_path = root.join(CASES_FILE);
        let cases = if cases_path.exists() {
            let f = fs::File::open(&cases_path).map_err(|e| StoreError::io(&cases_path, e))?;
            match ingest_case_data(f, &catalog.districts, catalog.age_groups.as_ref()) {
                Ok((records, _)) => records,
                Err(StoreError::CaseData(m)) if m == "no data rows" => Vec::new(),
                Err(e) => return Err(e),
            }
        } else {
            Vec::new()
        };
        Ok(Self { root, catalog, cases })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn catalog(&self) -> &StoreCatalog {
        &self.catalog
    }

    pub fn registry(&self) -> &DistrictRegistry {
        &self.catalog.districts
    }

    pub fn cases(&self) -> &[CaseRecord] {
        &self.cases
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioEntry> {
        self.catalog.scenarios.get(id)
    }

    pub fn run(&self, id: &str) -> Option<&RunEntry> {
        self.catalog.runs.get(id)
    }

    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join("runs").join(run_id)
    }

    fn persist(&self) -> Result<()> {
        let path = self.root.join(CATALOG_FILE);
        let tmp = self.root.join(format!("{CATALOG_FILE}.tmp"));
        let text = serde_json::to_string_pretty(&self.catalog).map_err(|e| StoreError::json(&path, e))?;
        fs::write(&tmp, text + "\n").map_err(|e| StoreError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| StoreError::io(&path, e))
    }

    /// Stores a graph document under `graphs/<name>` and adds its districts
    /// to the registry.
    pub fn import_graph(&mut self, name: &str, graph: &GraphModel) -> Result<()> {
        if !is_valid_id(name) {
            return Err(StoreError::Format(format!("invalid graph name '{name}'")));
        }
        graph.validate()?;
        if let Some(existing) = &self.catalog.age_groups {
            if existing != &graph.age_groups {
                return Err(StoreError::Format(format!(
                    "graph '{name}' uses different age groups than the store"
                )));
            }
        }
        let path = self.root.join("graphs").join(name);
        fs::write(&path, graph.to_json()).map_err(|e| StoreError::io(&path, e))?;
        for d in &graph.districts {
            self.catalog.districts.upsert(crate::registry::RegistryEntry {
                id: d.id.clone(),
                name: d.name.clone(),
            });
        }
        self.catalog.age_groups = Some(graph.age_groups.clone());
        self.persist()
    }

    pub fn load_graph(&self, name: &str) -> Result<GraphModel> {
        if !is_valid_id(name) {
            return Err(StoreError::NotFound { kind: "graph", id: name.into() });
        }
        let path = self.root.join("graphs").join(name);
        let text = fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                StoreError::NotFound { kind: "graph", id: name.into() }
            } else {
                StoreError::io(&path, e)
            }
        })?;
        Ok(GraphModel::from_json(&text)?)
    }

    /// Inserts or replaces a scenario definition, keeping its runs.
    pub fn put_scenario(&mut self, definition: ScenarioDefinition) -> Result<()> {
        self.put_scenario_derived(definition, None)
    }

    pub fn put_scenario_derived(&mut self, definition: ScenarioDefinition, derived_from: Option<String>) -> Result<()> {
        let groups = self.catalog.age_groups.as_ref().map_or(1, AgeGroupSpec::len);
        definition.validate(groups)?;
        match self.catalog.scenarios.get_mut(&definition.id) {
            Some(entry) => {
                entry.definition = definition;
                if derived_from.is_some() {
                    entry.derived_from = derived_from;
                }
            }
            None => {
                self.catalog.scenarios.insert(
                    definition.id.clone(),
                    ScenarioEntry { definition, runs: Vec::new(), derived_from },
                );
            }
        }
        self.persist()
    }

    /// Id the next call to [`Store::create_run`] will hand out.
    pub fn next_run_id(&self) -> String {
        format!("run-{:06}", self.catalog.next_run + 1)
    }

    /// Registers a new queued run of `scenario_id` and returns its id.
    pub fn create_run(&mut self, scenario_id: &str) -> Result<String> {
        let Some(entry) = self.catalog.scenarios.get_mut(scenario_id) else {
            return Err(StoreError::NotFound { kind: "scenario", id: scenario_id.into() });
        };
        let run_id = format!("run-{:06}", self.catalog.next_run + 1);
        self.catalog.next_run += 1;
        entry.runs.push(run_id.clone());
        self.catalog.runs.insert(
            run_id.clone(),
            RunEntry {
                scenario_id: scenario_id.into(),
                status: RunStatus::Queued,
                created_at: Utc::now(),
                message: None,
            },
        );
        self.persist()?;
        Ok(run_id)
    }

    pub fn set_run_status(&mut self, run_id: &str, status: RunStatus, message: Option<String>) -> Result<()> {
        let Some(run) = self.catalog.runs.get_mut(run_id) else {
            return Err(StoreError::NotFound { kind: "run", id: run_id.into() });
        };
        run.status = status;
        run.message = message;
        self.persist()
    }

    /// Writes the result of a run and marks it done.
    pub fn save_run(&mut self, run_id: &str, result: &SimulationResult) -> Result<()> {
        if !self.catalog.runs.contains_key(run_id) {
            return Err(StoreError::NotFound { kind: "run", id: run_id.into() });
        }
        save_result(result, &self.run_dir(run_id))?;
        self.set_run_status(run_id, RunStatus::Done, None)
    }

    pub fn load_run(&self, run_id: &str) -> Result<SimulationResult> {
        match self.catalog.runs.get(run_id) {
            Some(r) if r.status == RunStatus::Done => load_result(&self.run_dir(run_id)),
            Some(r) => Err(StoreError::Format(format!("run '{run_id}' is {:?}", r.status).to_lowercase())),
            None => Err(StoreError::NotFound { kind: "run", id: run_id.into() }),
        }
    }

    /// Newest finished run of a scenario.
    pub fn latest_completed_run(&self, scenario_id: &str) -> Option<&str> {
        self.catalog.scenarios.get(scenario_id)?.runs.iter().rev().find_map(|id| {
            (self.catalog.runs.get(id)?.status == RunStatus::Done).then_some(id.as_str())
        })
    }

    /// Runs a scenario against its graph and stores the result.
    pub fn execute(&mut self, scenario_id: &str) -> Result<String> {
        let entry = self
            .scenario(scenario_id)
            .ok_or_else(|| StoreError::NotFound { kind: "scenario", id: scenario_id.into() })?;
        let definition = entry.definition.clone();
        let graph = self.load_graph(&definition.graph)?;
        let run_id = self.create_run(scenario_id)?;
        self.set_run_status(&run_id, RunStatus::Running, None)?;
        match esid_core::ensemble::run_ensemble(&definition, &graph) {
            Ok(result) => {
                self.save_run(&run_id, &result)?;
                Ok(run_id)
            }
            Err(e) => {
                log::warn!("run {run_id} of {scenario_id} failed: {e}");
                self.set_run_status(&run_id, RunStatus::Failed, Some(e.to_string()))?;
                Err(e.into())
            }
        }
    }

    /// Ingests case CSV, merging with earlier data.
    pub fn ingest_cases<R: Read>(&mut self, input: R) -> Result<IngestReport> {
        let (records, report) = ingest_case_data(input, &self.catalog.districts, self.catalog.age_groups.as_ref())?;
        if report.rejected > 0 {
            log::warn!("case data: {} rows rejected", report.rejected);
        }
        self.cases = merge_records(&self.cases, records);
        let path = self.root.join(CASES_FILE);
        let f = fs::File::create(&path).map_err(|e| StoreError::io(&path, e))?;
        write_case_csv(&self.cases, std::io::BufWriter::new(f))?;
        Ok(report)
    }

    pub fn search(&self, query: &str) -> Result<Vec<DistrictMatch>> {
        self.catalog.districts.search(query)
    }

    /// Hash of the catalog and case data, for detecting modification.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        serde_json::to_string(&self.catalog).expect("catalog serializes").hash(&mut h);
        serde_json::to_string(&self.cases).expect("cases serialize").hash(&mut h);
        h.finish()
    }
}
