//! Surveillance case data: CSV ingest, initial states and per-district series.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use esid_core::ensemble::TOTAL_GROUP;
use esid_core::graph::District;
use esid_core::model::{AgeGroupSpec, Compartment, CompartmentTensor};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};
use crate::registry::DistrictRegistry;

pub const CASE_HEADER: [&str; 6] = ["date", "county_id", "age_group", "confirmed", "deaths", "recovered"];

/// Cumulative counts reported for one district and age group on one date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub date: NaiveDate,
    #[serde(rename = "county_id")]
    pub district: String,
    pub age_group: String,
    pub confirmed: u64,
    pub deaths: u64,
    pub recovered: u64,
}

impl CaseRecord {
    pub fn active(&self) -> u64 {
        self.confirmed.saturating_sub(self.deaths + self.recovered)
    }

    fn key(&self) -> (String, NaiveDate, String) {
        (self.district.clone(), self.date, self.age_group.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based line in the input, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    /// Rows repeating an earlier (date, district, age group); the later row wins.
    pub duplicates: usize,
    pub errors: Vec<RowError>,
}

fn parse_count(field: &str, name: &str) -> std::result::Result<u64, String> {
    let t = field.trim();
    match t.parse::<i64>() {
        Ok(v) if v < 0 => Err(format!("negative count in {name}")),
        Ok(v) => Ok(v as u64),
        Err(_) => Err(format!("invalid count in {name}: '{t}'")),
    }
}

/// Parses case CSV text with header `date,county_id,age_group,confirmed,deaths,recovered`.
///
/// Bad rows are rejected individually and listed in the report; the
/// accepted records come back deduplicated and sorted by district, date and
/// age group.
pub fn ingest_case_data<R: Read>(
    input: R,
    registry: &DistrictRegistry,
    age_groups: Option<&AgeGroupSpec>,
) -> Result<(Vec<CaseRecord>, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows = reader.records();

    let header = match rows.next() {
        None => return Err(StoreError::CaseData("empty input".into())),
        Some(Err(e)) => return Err(StoreError::CaseData(e.to_string())),
        Some(Ok(h)) => h,
    };
    let names: Vec<&str> = header.iter().map(|h| h.trim().trim_start_matches('\u{feff}')).collect();
    if names != CASE_HEADER {
        return Err(StoreError::CaseData(format!(
            "expected header '{}', found '{}'",
            CASE_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut report = IngestReport::default();
    let mut records: BTreeMap<(String, NaiveDate, String), CaseRecord> = BTreeMap::new();
    let mut any_row = false;
    for row in rows {
        any_row = true;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                report.rejected += 1;
                report.errors.push(RowError { line, reason: e.to_string() });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, registry, age_groups) {
            Ok(rec) => {
                report.accepted += 1;
                if records.insert(rec.key(), rec).is_some() {
                    report.duplicates += 1;
                }
            }
            Err(reason) => {
                report.rejected += 1;
                report.errors.push(RowError { line, reason });
            }
        }
    }
    if !any_row {
        return Err(StoreError::CaseData("no data rows".into()));
    }

    let mut out: Vec<CaseRecord> = records.into_values().collect();
    if let Some(spec) = age_groups {
        out.sort_by_key(|r| (r.district.clone(), r.date, spec.position(&r.age_group)));
    }
    Ok((out, report))
}

fn parse_row(
    row: &csv::StringRecord,
    registry: &DistrictRegistry,
    age_groups: Option<&AgeGroupSpec>,
) -> std::result::Result<CaseRecord, String> {
    if row.len() != CASE_HEADER.len() {
        return Err(format!("expected {} fields, found {}", CASE_HEADER.len(), row.len()));
    }
    let date = NaiveDate::parse_from_str(row[0].trim(), "%Y-%m-%d").map_err(|_| "invalid date".to_string())?;
    let district = row[1].trim().to_string();
    if !registry.contains(&district) {
        return Err(format!("unknown district id '{district}'"));
    }
    let age_group = row[2].trim().to_string();
    if let Some(spec) = age_groups {
        if spec.position(&age_group).is_none() {
            return Err(format!("unknown age group '{age_group}'"));
        }
    }
    let confirmed = parse_count(&row[3], "confirmed")?;
    let deaths = parse_count(&row[4], "deaths")?;
    let recovered = parse_count(&row[5], "recovered")?;
    if deaths + recovered > confirmed {
        return Err(format!(
            "inconsistent cumulative counts: deaths {deaths} + recovered {recovered} exceed confirmed {confirmed}"
        ));
    }
    Ok(CaseRecord { date, district, age_group, confirmed, deaths, recovered })
}

/// Merges `new` into `existing`; records with the same (date, district, age
/// group) are replaced. The result is sorted.
pub fn merge_records(existing: &[CaseRecord], new: Vec<CaseRecord>) -> Vec<CaseRecord> {
    let mut map: BTreeMap<_, _> = existing.iter().map(|r| (r.key(), r.clone())).collect();
    for r in new {
        map.insert(r.key(), r);
    }
    map.into_values().collect()
}

/// Writes records in the ingest CSV layout.
pub fn write_case_csv<W: std::io::Write>(records: &[CaseRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| StoreError::CaseData(e.to_string());
    w.write_record(CASE_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.date.to_string(),
            r.district.clone(),
            r.age_group.clone(),
            r.confirmed.to_string(),
            r.deaths.to_string(),
            r.recovered.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| StoreError::CaseData(e.to_string()))
}

/// Initial states from reported counts on `date`: D = deaths, R = recovered,
/// I = active cases, S = population - confirmed, everything else zero.
/// Districts or groups without a record on that date start disease-free.
pub fn initialize_from_cases(
    records: &[CaseRecord],
    date: NaiveDate,
    districts: &[District],
    age_groups: &AgeGroupSpec,
) -> Result<Vec<CompartmentTensor>> {
    let at_date: BTreeMap<(&str, &str), &CaseRecord> = records
        .iter()
        .filter(|r| r.date == date)
        .map(|r| ((r.district.as_str(), r.age_group.as_str()), r))
        .collect();

    districts
        .iter()
        .map(|d| {
            if d.population.len() != age_groups.len() {
                return Err(StoreError::Initialization {
                    district: d.id.clone(),
                    group: String::new(),
                    reason: format!("population has {} groups, expected {}", d.population.len(), age_groups.len()),
                });
            }
            let mut t = CompartmentTensor::zeros(age_groups.len());
            for (g, label) in age_groups.labels().enumerate() {
                let pop = d.population[g];
                let (confirmed, deaths, recovered) = at_date
                    .get(&(d.id.as_str(), label))
                    .map_or((0.0, 0.0, 0.0), |r| (r.confirmed as f64, r.deaths as f64, r.recovered as f64));
                let fail = |reason: String| StoreError::Initialization {
                    district: d.id.clone(),
                    group: label.to_string(),
                    reason,
                };
                let active = confirmed - deaths - recovered;
                if active < 0.0 {
                    return Err(fail(format!("deaths + recovered exceed confirmed ({confirmed})")));
                }
                let susceptible = pop - confirmed;
                if susceptible < 0.0 {
                    return Err(fail(format!("confirmed {confirmed} exceeds population {pop}")));
                }
                t.set(g, Compartment::Susceptible, susceptible);
                t.set(g, Compartment::InfectiousSymptomatic, active);
                t.set(g, Compartment::Recovered, recovered);
                t.set(g, Compartment::Dead, deaths);
            }
            Ok(t)
        })
        .collect()
}

/// Reported series for one district, ascending by date.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CaseSeries {
    pub district: String,
    pub group: String,
    pub dates: Vec<NaiveDate>,
    pub confirmed: Vec<u64>,
    pub deaths: Vec<u64>,
    pub recovered: Vec<u64>,
    pub active: Vec<u64>,
}

/// Series for one age-group label, or the per-date sum over all labels for
/// [`TOTAL_GROUP`].
pub fn case_series(records: &[CaseRecord], district: &str, group: &str) -> CaseSeries {
    let mut by_date: BTreeMap<NaiveDate, [u64; 3]> = BTreeMap::new();
    for r in records.iter().filter(|r| r.district == district) {
        if group != TOTAL_GROUP && r.age_group != group {
            continue;
        }
        let e = by_date.entry(r.date).or_default();
        e[0] += r.confirmed;
        e[1] += r.deaths;
        e[2] += r.recovered;
    }
    let mut s = CaseSeries {
        district: district.into(),
        group: group.into(),
        ..Default::default()
    };
    for (date, [c, d, r]) in by_date {
        s.dates.push(date);
        s.confirmed.push(c);
        s.deaths.push(d);
        s.recovered.push(r);
        s.active.push(c.saturating_sub(d + r));
    }
    s
}
