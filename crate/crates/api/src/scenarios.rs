use std::collections::BTreeMap;

use axum::extract::{Path, State};
use axum::Json;
use chrono::NaiveDate;
use esid_core::ensemble::{ParameterRanges, ScenarioDefinition};
use esid_core::model::Damping;
use esid_store::{ScenarioEntry, Store};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::runs::RunStatusBody;
use crate::AppState;

/// `done` once any run finished, `pending` before that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioStatus {
    Pending,
    Done,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub name: String,
    pub description: String,
    pub color: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub num_days: u32,
    pub status: ScenarioStatus,
    pub latest_run: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioList {
    pub scenarios: Vec<ScenarioSummary>,
}

/// Summary plus everything an expert needs to derive a run from it.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioDetail {
    #[serde(flatten)]
    pub summary: ScenarioSummary,
    pub age_groups: Vec<String>,
    pub parameter_ranges: Vec<ParameterRanges>,
    pub dampings: Vec<Damping>,
    pub district_dampings: BTreeMap<String, Vec<Damping>>,
    pub members: u32,
    pub seed: u64,
    pub graph: String,
    pub runs: Vec<RunStatusBody>,
}

fn summary(store: &Store, entry: &ScenarioEntry) -> ScenarioSummary {
    let d: &ScenarioDefinition = &entry.definition;
    let latest = store.latest_completed_run(&d.id);
    ScenarioSummary {
        id: d.id.clone(),
        name: d.name.clone(),
        description: d.description.clone(),
        color: d.color.clone(),
        start_date: d.start_date,
        end_date: d.start_date + chrono::Days::new(u64::from(d.num_days)),
        num_days: d.num_days,
        status: if latest.is_some() { ScenarioStatus::Done } else { ScenarioStatus::Pending },
        latest_run: latest.map(str::to_string),
        derived_from: entry.derived_from.clone(),
    }
}

pub async fn list(State(state): State<AppState>) -> Json<ScenarioList> {
    let store = state.store();
    let scenarios = store.catalog().scenarios.values().map(|e| summary(&store, e)).collect();
    Json(ScenarioList { scenarios })
}

pub async fn detail(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ScenarioDetail>> {
    let store = state.store();
    let entry = store
        .scenario(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown scenario '{id}'")))?;
    let d = &entry.definition;
    let runs = entry
        .runs
        .iter()
        .filter_map(|r| store.run(r).map(|run| RunStatusBody::new(r, run)))
        .collect();
    let groups = store
        .catalog()
        .age_groups
        .as_ref()
        .map(|g| g.labels().map(str::to_string).collect())
        .unwrap_or_default();
    Ok(Json(ScenarioDetail {
        summary: summary(&store, entry),
        age_groups: groups,
        parameter_ranges: d.parameter_ranges.clone(),
        dampings: d.dampings.clone(),
        district_dampings: d.district_dampings.clone(),
        members: d.members,
        seed: d.seed,
        graph: d.graph.clone(),
        runs,
    }))
}
