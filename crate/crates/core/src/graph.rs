//! Districts coupled by daily commuter exchange.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    advance_day, effective_contacts, steps_per_day, validate_dampings, validate_node_inputs,
    AgeGroupSpec, Compartment, CompartmentTensor, ContactMatrices, Damping, EpiParameters,
    NUM_COMPARTMENTS,
};

/// Pseudo-district key under which national aggregates are reported.
pub const NATIONAL_ID: &str = "00000";

/// Checks the five-digit, zero-padded district key format.
pub fn is_district_key(id: &str) -> bool {
    id.len() == 5 && id.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct District {
    pub id: String,
    pub name: String,
    /// Persons per age group.
    pub population: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityEdge {
    pub from: String,
    pub to: String,
    /// Persons per day and age group travelling from `from` to `to`.
    pub commuters: Vec<f64>,
}

/// A mobility edge with district ids resolved to positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Commute {
    pub from: usize,
    pub to: usize,
    pub commuters: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExchangeReport {
    /// (district, group) pairs whose outgoing demand exceeded the mobile
    /// population and was scaled down.
    pub over_demand: usize,
}

/// Moves commuters between districts. All fluxes are computed from the
/// pre-exchange state and applied at once; only S, E, C and R travel.
///
/// For an edge `m -> n` and mobile compartment `X`, the flux is
/// `commuters * X_m / P_m` with `P_m = S + E + C + R`. When the total
/// demand leaving `m` exceeds `P_m`, every edge out of `m` is scaled by
/// the same factor.
pub fn mobility_exchange(states: &mut [CompartmentTensor], commutes: &[Commute]) -> ExchangeReport {
    let Some(groups) = states.first().map(CompartmentTensor::num_groups) else {
        return ExchangeReport::default();
    };
    let mobile: Vec<usize> = Compartment::ALL
        .iter()
        .filter(|c| c.is_mobile())
        .map(|c| c.index())
        .collect();

    let mobile_pop = |t: &CompartmentTensor, g: usize| -> f64 {
        mobile.iter().map(|&c| t.group(g)[c]).sum()
    };

    // canonical order makes the accumulation independent of the input order
    let mut ordered: Vec<&Commute> = commutes.iter().collect();
    ordered.sort_by(|a, b| {
        (a.from, a.to)
            .cmp(&(b.from, b.to))
            .then_with(|| a.commuters.iter().map(|v| v.to_bits()).cmp(b.commuters.iter().map(|v| v.to_bits())))
    });

    let mut demand = vec![0.0; states.len() * groups];
    for e in &ordered {
        for g in 0..groups {
            demand[e.from * groups + g] += e.commuters[g];
        }
    }

    let mut report = ExchangeReport::default();
    let mut scale = vec![1.0; states.len() * groups];
    for (m, state) in states.iter().enumerate() {
        for g in 0..groups {
            let p = mobile_pop(state, g);
            let d = demand[m * groups + g];
            if d > p {
                report.over_demand += 1;
                scale[m * groups + g] = if d > 0.0 { p / d } else { 0.0 };
            }
        }
    }

    let mut delta = vec![0.0; states.len() * groups * NUM_COMPARTMENTS];
    for e in &ordered {
        let src = &states[e.from];
        for g in 0..groups {
            let p = mobile_pop(src, g);
            if p <= 0.0 {
                continue;
            }
            let travellers = e.commuters[g] * scale[e.from * groups + g];
            for &c in &mobile {
                let flux = travellers * src.group(g)[c] / p;
                delta[(e.from * groups + g) * NUM_COMPARTMENTS + c] -= flux;
                delta[(e.to * groups + g) * NUM_COMPARTMENTS + c] += flux;
            }
        }
    }

    for (m, state) in states.iter_mut().enumerate() {
        for g in 0..groups {
            let base = (m * groups + g) * NUM_COMPARTMENTS;
            for (c, x) in state.group_mut(g).iter_mut().enumerate() {
                *x = (*x + delta[base + c]).max(0.0);
            }
        }
    }
    report
}

/// Districts, their initial states and the mobility network, plus the
/// contact structure and intervention schedule shared by all districts.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphModel {
    pub age_groups: AgeGroupSpec,
    pub contacts: ContactMatrices,
    pub districts: Vec<District>,
    pub initial: Vec<CompartmentTensor>,
    pub edges: Vec<MobilityEdge>,
    pub dampings: Vec<Damping>,
    /// Per-district schedules replacing `dampings` for that district.
    pub district_dampings: BTreeMap<String, Vec<Damping>>,
}

impl GraphModel {
    pub fn num_groups(&self) -> usize {
        self.age_groups.len()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.districts.iter().position(|d| d.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let groups = self.num_groups();
        if self.districts.is_empty() {
            return Err(Error::invalid("districts", "at least one district is required"));
        }
        if self.initial.len() != self.districts.len() {
            return Err(Error::Shape {
                what: "initial states",
                expected: self.districts.len(),
                actual: self.initial.len(),
            });
        }
        self.contacts.validate(groups)?;
        validate_dampings(&self.dampings, groups, "dampings")?;

        let mut seen = HashMap::new();
        for (i, d) in self.districts.iter().enumerate() {
            let field = |f: &str| format!("districts[{i}].{f}");
            if !is_district_key(&d.id) || d.id == NATIONAL_ID {
                return Err(Error::invalid(field("id"), format!("'{}' is not a five-digit district key", d.id)));
            }
            if seen.insert(d.id.as_str(), i).is_some() {
                return Err(Error::invalid(field("id"), format!("duplicate district id '{}'", d.id)));
            }
            if d.population.len() != groups {
                return Err(Error::invalid(
                    field("population"),
                    format!("expected {groups} age groups, got {}", d.population.len()),
                ));
            }
            if d.population.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::invalid(field("population"), "entries must be finite and nonnegative"));
            }
            let init = &self.initial[i];
            if init.num_groups() != groups {
                return Err(Error::invalid(field("initial"), "age group count mismatch"));
            }
            CompartmentTensor::from_values(groups, init.as_slice().to_vec())
                .map_err(|e| Error::invalid(field("initial"), e.to_string()))?;
        }
        for (id, dampings) in &self.district_dampings {
            if !seen.contains_key(id.as_str()) {
                return Err(Error::invalid("district_dampings", format!("unknown district '{id}'")));
            }
            validate_dampings(dampings, groups, &format!("district_dampings.{id}"))?;
        }
        for (i, e) in self.edges.iter().enumerate() {
            let field = |f: &str| format!("edges[{i}].{f}");
            for (name, id) in [("from", &e.from), ("to", &e.to)] {
                if !seen.contains_key(id.as_str()) {
                    return Err(Error::invalid(field(name), format!("unknown district '{id}'")));
                }
            }
            if e.from == e.to {
                return Err(Error::invalid(field("to"), "edge must connect two different districts"));
            }
            if e.commuters.len() != groups {
                return Err(Error::invalid(
                    field("commuters"),
                    format!("expected {groups} age groups, got {}", e.commuters.len()),
                ));
            }
            if e.commuters.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::invalid(field("commuters"), "entries must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn commutes(&self) -> Vec<Commute> {
        let index: HashMap<&str, usize> =
            self.districts.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
        self.edges
            .iter()
            .map(|e| Commute {
                from: index[e.from.as_str()],
                to: index[e.to.as_str()],
                commuters: e.commuters.clone(),
            })
            .collect()
    }

    fn dampings_for(&self, district: usize) -> &[Damping] {
        self.district_dampings
            .get(&self.districts[district].id)
            .map_or(&self.dampings, Vec::as_slice)
    }

    /// Parses the graph JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::invalid("graph", e.to_string()))?;
        file.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph serializes")
    }
}

/// Output of [`simulate_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphRun {
    /// `trajectories[district][day]` for days `0..=num_days`.
    pub trajectories: Vec<Vec<CompartmentTensor>>,
    /// Total over-demand events reported by the daily exchanges.
    pub over_demand: usize,
}

/// Simulates all districts: each day integrates every district on its own,
/// then applies one commuter exchange.
pub fn simulate_graph(
    model: &GraphModel,
    params: &[EpiParameters],
    num_days: u32,
    dt: f64,
) -> Result<GraphRun> {
    model.validate()?;
    if num_days < 1 {
        return Err(Error::invalid("num_days", "must be at least 1"));
    }
    if params.len() != model.districts.len() {
        return Err(Error::Shape {
            what: "district parameters",
            expected: model.districts.len(),
            actual: params.len(),
        });
    }
    let steps = steps_per_day(dt)?;
    let groups = model.num_groups();
    for (i, p) in params.iter().enumerate() {
        validate_node_inputs(groups, p, &model.contacts, model.dampings_for(i))
            .map_err(|e| annotate(model, i, e))?;
    }

    let commutes = model.commutes();
    let mut trajectories: Vec<Vec<CompartmentTensor>> = model
        .initial
        .iter()
        .map(|s| {
            let mut t = Vec::with_capacity(num_days as usize + 1);
            t.push(s.clone());
            t
        })
        .collect();
    let mut over_demand = 0;

    for day in 0..num_days {
        let shared = effective_contacts(&model.contacts, &model.dampings, day);
        let mut next: Vec<CompartmentTensor> = trajectories
            .par_iter()
            .enumerate()
            .map(|(i, traj)| {
                let contacts = if model.district_dampings.contains_key(&model.districts[i].id) {
                    effective_contacts(&model.contacts, model.dampings_for(i), day)
                } else {
                    shared.clone()
                };
                advance_day(traj.last().expect("day 0 present"), &params[i], &contacts, dt, steps, day)
                    .map_err(|e| annotate(model, i, e))
            })
            .collect::<Result<_>>()?;
        over_demand += mobility_exchange(&mut next, &commutes).over_demand;
        for (traj, state) in trajectories.iter_mut().zip(next) {
            traj.push(state);
        }
    }
    Ok(GraphRun { trajectories, over_demand })
}

fn annotate(model: &GraphModel, district: usize, e: Error) -> Error {
    Error::District {
        id: model.districts[district].id.clone(),
        source: Box::new(e),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    age_groups: AgeGroupSpec,
    contacts: ContactMatrices,
    districts: Vec<DistrictEntry>,
    #[serde(default)]
    edges: Vec<MobilityEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistrictEntry {
    id: String,
    name: String,
    population: Vec<f64>,
    /// Per-compartment values by code; S defaults to the remainder of the population.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    initial: BTreeMap<Compartment, Vec<f64>>,
}

impl GraphFile {
    fn into_model(self) -> Result<GraphModel> {
        let groups = self.age_groups.len();
        let mut districts = Vec::with_capacity(self.districts.len());
        let mut initial = Vec::with_capacity(self.districts.len());
        for (i, d) in self.districts.into_iter().enumerate() {
            let field = format!("districts[{i}].initial");
            if d.population.len() != groups {
                return Err(Error::invalid(
                    format!("districts[{i}].population"),
                    format!("expected {groups} age groups, got {}", d.population.len()),
                ));
            }
            let mut state = CompartmentTensor::zeros(groups);
            for (c, values) in &d.initial {
                if values.len() != groups {
                    return Err(Error::invalid(
                        format!("{field}.{c}"),
                        format!("expected {groups} age groups, got {}", values.len()),
                    ));
                }
                for (g, v) in values.iter().enumerate() {
                    state.set(g, *c, *v);
                }
            }
            for g in 0..groups {
                let pop = d.population[g];
                let assigned = state.group_total(g);
                if d.initial.contains_key(&Compartment::Susceptible) {
                    if (assigned - pop).abs() > 1e-9 * pop.max(1.0) {
                        return Err(Error::invalid(
                            field.clone(),
                            format!("group {g}: compartments sum to {assigned}, population is {pop}"),
                        ));
                    }
                } else {
                    let rest = pop - assigned;
                    if rest < 0.0 {
                        return Err(Error::invalid(
                            field.clone(),
                            format!("group {g}: compartments exceed population {pop}"),
                        ));
                    }
                    state.set(g, Compartment::Susceptible, rest);
                }
            }
            districts.push(District { id: d.id, name: d.name, population: d.population });
            initial.push(state);
        }
        let model = GraphModel {
            age_groups: self.age_groups,
            contacts: self.contacts,
            districts,
            initial,
            edges: self.edges,
            dampings: Vec::new(),
            district_dampings: BTreeMap::new(),
        };
        model.validate()?;
        Ok(model)
    }
}

impl From<&GraphModel> for GraphFile {
    fn from(m: &GraphModel) -> Self {
        let districts = m
            .districts
            .iter()
            .zip(&m.initial)
            .map(|(d, s)| DistrictEntry {
                id: d.id.clone(),
                name: d.name.clone(),
                population: d.population.clone(),
                initial: Compartment::ALL
                    .iter()
                    .map(|c| (*c, (0..s.num_groups()).map(|g| s.get(g, *c)).collect()))
                    .collect(),
            })
            .collect();
        GraphFile {
            age_groups: m.age_groups.clone(),
            contacts: m.contacts.clone(),
            districts,
            edges: m.edges.clone(),
        }
    }
}
