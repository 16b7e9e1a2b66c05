//! Read-only views over completed runs, one per row of the interaction
//! matrix: the map fixes scenario, compartment and date and spans districts;
//! the chart fixes compartment and district and spans scenarios and dates;
//! the card fixes scenario, date and district and spans compartments.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::Json;
use chrono::NaiveDate;
use esid_core::ensemble::{percentile_index, SimulationResult, Trend, PERCENTILES, TOTAL_GROUP};
use esid_core::graph::NATIONAL_ID;
use esid_core::model::Compartment;
use esid_store::cases::{case_series, CaseSeries};
use esid_store::registry::DistrictMatch;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::AppState;

/// Query-string parameters shared by the views. Everything arrives as text
/// so that bad values get the same error body as other failures.
#[derive(Debug, Default, Deserialize)]
pub struct Params {
    pub compartment: Option<String>,
    pub day: Option<String>,
    pub group: Option<String>,
    pub percentile: Option<String>,
    pub district: Option<String>,
    pub q: Option<String>,
}

fn required<'a>(value: &'a Option<String>, name: &str) -> ApiResult<&'a str> {
    value
        .as_deref()
        .filter(|v| !v.trim().is_empty())
        .ok_or_else(|| ApiError::invalid(name, format!("missing query parameter '{name}'")))
}

fn compartment(p: &Params) -> ApiResult<Compartment> {
    let raw = required(&p.compartment, "compartment")?;
    raw.parse()
        .map_err(|_| ApiError::not_found(format!("unknown compartment '{raw}'")))
}

fn day(p: &Params, meta_days: u32) -> ApiResult<u32> {
    let raw = required(&p.day, "day")?;
    let day: u32 = raw
        .trim()
        .parse()
        .map_err(|_| ApiError::invalid("day", format!("day must be a nonnegative integer, got '{raw}'")))?;
    if day > meta_days {
        return Err(ApiError::invalid("day", format!("day {day} outside 0..={meta_days}")));
    }
    Ok(day)
}

fn group(p: &Params) -> &str {
    p.group.as_deref().filter(|g| !g.is_empty()).unwrap_or(TOTAL_GROUP)
}

fn group_slot(result: &SimulationResult, label: &str) -> ApiResult<usize> {
    result
        .metadata
        .group_slot(label)
        .ok_or_else(|| ApiError::not_found(format!("unknown age group '{label}'")))
}

fn district_slot(result: &SimulationResult, id: &str) -> ApiResult<usize> {
    result
        .metadata
        .district_slot(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown district '{id}'")))
}

fn percentile(p: &Params) -> ApiResult<(usize, u8)> {
    let Some(raw) = p.percentile.as_deref() else {
        return Ok((percentile_index(50).expect("median stored"), 50));
    };
    let q: u8 = raw
        .trim()
        .trim_start_matches('p')
        .parse()
        .map_err(|_| ApiError::invalid("percentile", format!("invalid percentile '{raw}'")))?;
    percentile_index(q)
        .map(|i| (i, q))
        .ok_or_else(|| ApiError::invalid("percentile", format!("percentile must be one of {PERCENTILES:?}")))
}

/// Latest completed run of a scenario.
async fn completed(state: &AppState, scenario: &str) -> ApiResult<(String, Arc<SimulationResult>)> {
    let run = {
        let store = state.store();
        if store.scenario(scenario).is_none() {
            return Err(ApiError::not_found(format!("unknown scenario '{scenario}'")));
        }
        store
            .latest_completed_run(scenario)
            .map(str::to_string)
            .ok_or_else(|| ApiError::not_found(format!("scenario '{scenario}' has no completed run")))?
    };
    let result = state.result(&run).await?;
    Ok((run, result))
}

fn district_name(result: &SimulationResult, slot: usize) -> String {
    result
        .metadata
        .districts
        .get(slot)
        .map_or_else(|| "Germany".to_string(), |d| d.name.clone())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MapDimensions {
    pub scenario: String,
    pub run: String,
    pub compartment: Compartment,
    pub day: u32,
    pub date: NaiveDate,
    pub group: String,
    pub percentile: u8,
    pub district: Vec<String>,
}

/// One value per district; `values[i]` belongs to `dimensions.district[i]`.
#[derive(Debug, Serialize, Deserialize)]
pub struct MapSlice {
    pub dimensions: MapDimensions,
    pub district_names: Vec<String>,
    pub values: Vec<f64>,
}

pub async fn map(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<Params>,
) -> ApiResult<Json<MapSlice>> {
    let (run, result) = completed(&state, &id).await?;
    let meta = &result.metadata;
    let c = compartment(&params)?;
    let day = day(&params, meta.num_days)?;
    let label = group(&params);
    let g = group_slot(&result, label)?;
    let (p, q) = percentile(&params)?;
    let slots = 0..meta.districts.len();
    Ok(Json(MapSlice {
        values: slots.clone().map(|d| result.value(p, d, day as usize, g, c)).collect(),
        district_names: meta.districts.iter().map(|d| d.name.clone()).collect(),
        dimensions: MapDimensions {
            scenario: id,
            run,
            compartment: c,
            day,
            date: meta.date_of(day),
            group: label.to_string(),
            percentile: q,
            district: meta.districts.iter().map(|d| d.id.clone()).collect(),
        },
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChartDimensions {
    pub scenario: Vec<String>,
    pub compartment: Compartment,
    pub district: String,
    pub group: String,
    /// Union of the day axes of all bundles.
    pub day: Vec<u32>,
    pub percentile: Vec<u8>,
}

/// Percentile series of one scenario; each array has `num_days + 1` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartBundle {
    pub scenario: String,
    pub run: String,
    pub color: String,
    pub dates: Vec<NaiveDate>,
    pub p5: Vec<f64>,
    pub p25: Vec<f64>,
    pub p50: Vec<f64>,
    pub p75: Vec<f64>,
    pub p95: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChartSeries {
    pub dimensions: ChartDimensions,
    pub district_name: String,
    pub series: Vec<ChartBundle>,
}

pub async fn chart(State(state): State<AppState>, Query(params): Query<Params>) -> ApiResult<Json<ChartSeries>> {
    let c = compartment(&params)?;
    let district = required(&params.district, "district")?.to_string();
    let label = group(&params).to_string();
    let runs: Vec<(String, String, String)> = {
        let store = state.store();
        if district != NATIONAL_ID && !store.registry().contains(&district) {
            return Err(ApiError::not_found(format!("unknown district '{district}'")));
        }
        if let Some(groups) = &store.catalog().age_groups {
            if label != TOTAL_GROUP && groups.position(&label).is_none() {
                return Err(ApiError::not_found(format!("unknown age group '{label}'")));
            }
        }
        store
            .catalog()
            .scenarios
            .iter()
            .filter_map(|(id, s)| {
                let run = store.latest_completed_run(id)?;
                Some((id.clone(), run.to_string(), s.definition.color.clone()))
            })
            .collect()
    };

    let mut series = Vec::with_capacity(runs.len());
    let mut name = None;
    let mut max_days = 0;
    for (scenario, run, color) in runs {
        let result = state.result(&run).await?;
        let Some(d) = result.metadata.district_slot(&district) else {
            continue;
        };
        let g = group_slot(&result, &label)?;
        name.get_or_insert_with(|| district_name(&result, d));
        max_days = max_days.max(result.metadata.num_days);
        let band = |q: u8| result.series(percentile_index(q).expect("stored percentile"), d, g, c);
        series.push(ChartBundle {
            scenario,
            run,
            color,
            dates: (0..=result.metadata.num_days).map(|t| result.metadata.date_of(t)).collect(),
            p5: band(5),
            p25: band(25),
            p50: band(50),
            p75: band(75),
            p95: band(95),
        });
    }
    let district_name = match name {
        Some(n) => n,
        None => state
            .store()
            .registry()
            .get(&district)
            .map_or_else(|| "Germany".to_string(), |e| e.name.clone()),
    };
    Ok(Json(ChartSeries {
        dimensions: ChartDimensions {
            scenario: series.iter().map(|s| s.scenario.clone()).collect(),
            compartment: c,
            district,
            group: label,
            day: if series.is_empty() { Vec::new() } else { (0..=max_days).collect() },
            percentile: PERCENTILES.to_vec(),
        },
        district_name,
        series,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CardDimensions {
    pub scenario: String,
    pub run: String,
    pub compartment: Vec<Compartment>,
    pub day: u32,
    pub date: NaiveDate,
    pub district: String,
    pub group: String,
    pub percentile: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CardEntry {
    pub compartment: Compartment,
    pub name: String,
    pub value: f64,
    /// Change of the median against day 0.
    pub trend: Trend,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CardValues {
    pub dimensions: CardDimensions,
    pub district_name: String,
    pub compartments: Vec<CardEntry>,
}

pub async fn card(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<Params>,
) -> ApiResult<Json<CardValues>> {
    let (run, result) = completed(&state, &id).await?;
    let meta = &result.metadata;
    let day = day(&params, meta.num_days)?;
    let district = required(&params.district, "district")?;
    let d = district_slot(&result, district)?;
    let label = group(&params);
    let g = group_slot(&result, label)?;
    let median = percentile_index(50).expect("median stored");
    let compartments = Compartment::ALL
        .into_iter()
        .map(|c| CardEntry {
            compartment: c,
            name: c.name().to_string(),
            value: result.value(median, d, day as usize, g, c),
            trend: result.trend(d, g, c, day as usize),
        })
        .collect();
    Ok(Json(CardValues {
        dimensions: CardDimensions {
            scenario: id,
            run,
            compartment: Compartment::ALL.to_vec(),
            day,
            date: meta.date_of(day),
            district: district.to_string(),
            group: label.to_string(),
            percentile: 50,
        },
        district_name: district_name(&result, d),
        compartments,
    }))
}

/// Reported series for a district; empty when nothing was ingested for it.
pub async fn case_data(
    State(state): State<AppState>,
    Path(district): Path<String>,
    Query(params): Query<Params>,
) -> Json<CaseSeries> {
    Json(case_series(state.store().cases(), &district, group(&params)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub matches: Vec<DistrictMatch>,
}

pub async fn search(State(state): State<AppState>, Query(params): Query<Params>) -> ApiResult<Json<SearchResponse>> {
    let query = params.q.unwrap_or_default();
    let matches = state.store().search(&query)?;
    Ok(Json(SearchResponse { query, matches }))
}
