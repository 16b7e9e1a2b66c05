use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use chrono::{DateTime, Utc};
use esid_core::ensemble::{ParameterRanges, ScenarioDefinition};
use esid_store::{RunEntry, RunStatus};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::AppState;

/// New values for one of the base scenario's dampings, addressed by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingOverride {
    pub index: usize,
    pub start_day: Option<u32>,
    pub end_day: Option<u32>,
    pub strength: Option<f64>,
}

/// Body of `POST /scenarios/{id}/runs`. An empty body reruns the base
/// scenario unchanged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    #[serde(default)]
    pub dampings: Vec<DampingOverride>,
    pub parameter_ranges: Option<Vec<ParameterRanges>>,
    pub members: Option<u32>,
    pub seed: Option<u64>,
    pub name: Option<String>,
}

impl RunRequest {
    /// Scenario definition derived from `base` with the overrides applied.
    pub fn apply(&self, base: &ScenarioDefinition, id: String) -> ApiResult<ScenarioDefinition> {
        let mut def = base.clone();
        def.id = id;
        def.name = self.name.clone().unwrap_or_else(|| format!("{} (custom)", base.name));
        for (i, o) in self.dampings.iter().enumerate() {
            let Some(d) = def.dampings.get_mut(o.index) else {
                return Err(ApiError::invalid(
                    format!("dampings[{i}].index"),
                    format!("scenario '{}' has {} dampings, no index {}", base.id, base.dampings.len(), o.index),
                ));
            };
            if let Some(v) = o.start_day {
                d.start_day = v;
            }
            if let Some(v) = o.end_day {
                d.end_day = v;
            }
            if let Some(v) = o.strength {
                d.strength = v;
            }
        }
        if let Some(r) = &self.parameter_ranges {
            def.parameter_ranges = r.clone();
        }
        if let Some(k) = self.members {
            def.members = k;
        }
        if let Some(seed) = self.seed {
            def.seed = seed;
        }
        Ok(def)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStatusBody {
    pub run_id: String,
    pub scenario_id: String,
    pub status: RunStatus,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunStatusBody {
    pub fn new(id: &str, run: &RunEntry) -> Self {
        Self {
            run_id: id.to_string(),
            scenario_id: run.scenario_id.clone(),
            status: run.status,
            created_at: run.created_at,
            message: run.message.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunAccepted {
    pub run_id: String,
    pub scenario_id: String,
    pub status: RunStatus,
    pub status_url: String,
}

fn derived_id(base: &str, run: &str) -> String {
    let keep = 64usize.saturating_sub(run.len() + 1);
    let base: String = base.chars().take(keep).collect();
    format!("{base}-{run}")
}

/// Validates the request, registers the derived scenario and queues the run.
pub async fn trigger(
    State(state): State<AppState>,
    Path(base_id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<RunAccepted>)> {
    let req: RunRequest = if body.iter().all(u8::is_ascii_whitespace) {
        RunRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid("body", e.to_string()))?
    };
    let (run_id, scenario_id) = {
        let mut store = state.store_mut();
        let base = store
            .scenario(&base_id)
            .ok_or_else(|| ApiError::not_found(format!("unknown scenario '{base_id}'")))?
            .definition
            .clone();
        let id = derived_id(&base_id, &store.next_run_id());
        let def = req.apply(&base, id.clone())?;
        store.put_scenario_derived(def, Some(base_id.clone()))?;
        (store.create_run(&id)?, id)
    };
    state.enqueue(run_id.clone())?;
    log::info!("queued {run_id} for {scenario_id}");
    Ok((
        StatusCode::ACCEPTED,
        Json(RunAccepted {
            status_url: format!("/runs/{run_id}/status"),
            run_id,
            scenario_id,
            status: RunStatus::Queued,
        }),
    ))
}

pub async fn status(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RunStatusBody>> {
    let store = state.store();
    let run = store
        .run(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown run '{id}'")))?;
    Ok(Json(RunStatusBody::new(&id, run)))
}
