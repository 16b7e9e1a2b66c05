use chrono::Utc;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{simulate_graph, GraphModel};
use crate::model::{EpiParameters, GroupParameters, NUM_COMPARTMENTS};
use crate::rng::CounterRng;

use super::result::{DistrictLabel, ResultMetadata, SimulationResult, PERCENTILES};
use super::scenario::{ParameterRanges, ScenarioDefinition};
use super::stats::percentile_sorted;

/// Draws every field uniformly from its range, age group by age group and
/// field by field in canonical order.
pub fn sample_parameters(ranges: &[ParameterRanges], rng: &mut CounterRng) -> Result<EpiParameters> {
    let mut groups = Vec::with_capacity(ranges.len());
    for (i, r) in ranges.iter().enumerate() {
        r.validate().map_err(|e| match e {
            Error::Invalid { field, reason } => {
                Error::invalid(format!("parameter_ranges[{i}].{field}"), reason)
            }
            other => other,
        })?;
        let p: GroupParameters =
            r.try_map::<_, Error>(|_, _, range| Ok(rng.uniform(range.min, range.max)))?;
        groups.push(p);
    }
    EpiParameters::new(groups)
}

/// Parameters of ensemble member `member`.
pub fn member_parameters(scenario: &ScenarioDefinition, groups: usize, member: u32) -> Result<EpiParameters> {
    let ranges = scenario.ranges_for(groups)?;
    sample_parameters(&ranges, &mut CounterRng::new(scenario.seed, member as u64))
}

/// Runs one graph simulation per ensemble member and reduces them to
/// per-cell percentile bands. Age and national aggregates are summed per
/// member before taking percentiles.
pub fn run_ensemble(scenario: &ScenarioDefinition, graph: &GraphModel) -> Result<SimulationResult> {
    graph.validate()?;
    let groups = graph.num_groups();
    scenario.validate(groups)?;
    let model = scenario.apply_to(graph);
    model.validate()?;

    let metadata = ResultMetadata {
        scenario_id: scenario.id.clone(),
        seed: scenario.seed,
        members: scenario.members,
        created_at: Utc::now(),
        start_date: scenario.start_date,
        num_days: scenario.num_days,
        percentiles: PERCENTILES.to_vec(),
        districts: model
            .districts
            .iter()
            .map(|d| DistrictLabel { id: d.id.clone(), name: d.name.clone() })
            .collect(),
        age_groups: model.age_groups.labels().map(str::to_string).collect(),
        compartments: crate::model::Compartment::ALL.to_vec(),
    };

    let members: Vec<Vec<f64>> = (0..scenario.members)
        .into_par_iter()
        .map(|m| {
            member_cells(scenario, &model, &metadata, m).map_err(|e| Error::Member {
                index: m,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let cells = members[0].len();
    let mut values = vec![0.0; metadata.len()];
    let per_percentile = cells;
    let bands: Vec<[f64; PERCENTILES.len()]> = (0..cells)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(members.len()),
            |buf, cell| {
                buf.clear();
                buf.extend(members.iter().map(|m| m[cell]));
                buf.sort_by(f64::total_cmp);
                PERCENTILES.map(|q| percentile_sorted(buf, q as f64))
            },
        )
        .collect();
    for (cell, band) in bands.iter().enumerate() {
        for (p, v) in band.iter().enumerate() {
            values[p * per_percentile + cell] = *v;
        }
    }
    SimulationResult::from_parts(metadata, values)
}

/// One member's values in (district slot, day, group slot, compartment) order.
fn member_cells(
    scenario: &ScenarioDefinition,
    model: &GraphModel,
    meta: &ResultMetadata,
    member: u32,
) -> Result<Vec<f64>> {
    let groups = model.num_groups();
    let params = member_parameters(scenario, groups, member)?;
    let params = vec![params; model.districts.len()];
    let run = simulate_graph(model, &params, scenario.num_days, scenario.dt)?;

    let days = meta.days();
    let block = meta.block_len();
    let national = model.districts.len();
    let mut cells = vec![0.0; meta.district_slots() * days * block];
    for (d, traj) in run.trajectories.iter().enumerate() {
        for (t, state) in traj.iter().enumerate() {
            let off = (d * days + t) * block;
            let out = &mut cells[off..off + block];
            for g in 0..groups {
                for (c, v) in state.group(g).iter().enumerate() {
                    out[g * NUM_COMPARTMENTS + c] = *v;
                    out[groups * NUM_COMPARTMENTS + c] += *v;
                }
            }
        }
    }
    for t in 0..days {
        let nat = (national * days + t) * block;
        for d in 0..national {
            let off = (d * days + t) * block;
            for k in 0..block {
                cells[nat + k] += cells[off + k];
            }
        }
    }
    Ok(cells)
}
