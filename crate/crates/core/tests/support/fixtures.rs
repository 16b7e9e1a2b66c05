//! Small district graphs and scenarios shared by integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use esid_core::ensemble::{ParameterRanges, ScenarioDefinition};
use esid_core::graph::{District, GraphModel, MobilityEdge};
use esid_core::model::{
    AgeGroupSpec, Compartment, CompartmentTensor, ContactMatrices, ContactMatrix, Damping,
    GroupParameters,
};

use super::euler::covid_like;

pub const GROUPS: [(&str, u32); 2] = [("A00-A59", 0), ("A60+", 60)];

fn matrix(rows: [[f64; 2]; 2]) -> ContactMatrix {
    ContactMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

pub fn contacts() -> ContactMatrices {
    ContactMatrices {
        home: matrix([[2.5, 0.6], [0.8, 1.8]]),
        school: matrix([[2.2, 0.1], [0.2, 0.0]]),
        work: matrix([[3.0, 0.3], [0.4, 0.2]]),
        other: matrix([[2.0, 0.7], [0.9, 1.5]]),
    }
}

/// Four districts in the Rhineland with balanced commuter links; the
/// epidemic is seeded in Köln only.
pub fn desk_graph() -> GraphModel {
    let districts = vec![
        District { id: "05315".into(), name: "Köln".into(), population: vec![850_000.0, 230_000.0] },
        District { id: "05111".into(), name: "Düsseldorf".into(), population: vec![480_000.0, 140_000.0] },
        District { id: "05113".into(), name: "Essen".into(), population: vec![430_000.0, 150_000.0] },
        District { id: "05334".into(), name: "Städteregion Aachen".into(), population: vec![410_000.0, 145_000.0] },
    ];
    let initial = districts
        .iter()
        .map(|d| {
            let mut t = CompartmentTensor::susceptible(&d.population);
            if d.id == "05315" {
                for (g, seed) in [(0, [400.0, 300.0, 200.0, 20.0, 5.0]), (1, [100.0, 80.0, 60.0, 15.0, 5.0])] {
                    let infected: f64 = seed.iter().sum();
                    t.set(g, Compartment::Susceptible, d.population[g] - infected);
                    for (c, v) in [
                        Compartment::Exposed,
                        Compartment::InfectiousNonSymptomatic,
                        Compartment::InfectiousSymptomatic,
                        Compartment::InfectedSevere,
                        Compartment::InfectiousCritical,
                    ]
                    .iter()
                    .zip(seed)
                    {
                        t.set(g, *c, v);
                    }
                }
            }
            t
        })
        .collect();
    let edge = |from: &str, to: &str, young: f64, old: f64| MobilityEdge {
        from: from.into(),
        to: to.into(),
        commuters: vec![young, old],
    };
    GraphModel {
        age_groups: AgeGroupSpec::from_bounds(&GROUPS).unwrap(),
        contacts: contacts(),
        districts,
        initial,
        edges: vec![
            edge("05315", "05111", 12_000.0, 800.0),
            edge("05111", "05315", 12_000.0, 800.0),
            edge("05315", "05334", 5_000.0, 300.0),
            edge("05334", "05315", 5_000.0, 300.0),
            edge("05113", "05111", 9_000.0, 500.0),
            edge("05111", "05113", 9_000.0, 500.0),
        ],
        dampings: vec![],
        district_dampings: BTreeMap::new(),
    }
}

/// Growing epidemic with 10 % parameter uncertainty.
pub fn desk_scenario(id: &str, members: u32) -> ScenarioDefinition {
    ScenarioDefinition {
        id: id.into(),
        name: format!("Scenario {id}"),
        description: "desk-scale test scenario".into(),
        color: "#1f77b4".into(),
        start_date: NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(),
        num_days: 100,
        parameter_ranges: vec![ParameterRanges::around(&covid_like(), 0.1)],
        dampings: vec![],
        district_dampings: BTreeMap::new(),
        graph: "graph.json".into(),
        members,
        seed: 20_210_301,
        dt: 0.1,
    }
}

/// Same scenario with every range collapsed to the central value.
pub fn fixed_scenario(id: &str, members: u32) -> ScenarioDefinition {
    ScenarioDefinition {
        parameter_ranges: vec![ParameterRanges::fixed(&covid_like())],
        ..desk_scenario(id, members)
    }
}

pub fn lockdown(strength: f64, start: u32, end: u32) -> Damping {
    Damping::all_locations(strength, start, end)
}

pub fn central_parameters() -> GroupParameters {
    covid_like()
}
