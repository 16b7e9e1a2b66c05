mod support;

use esid_core::graph::{mobility_exchange, simulate_graph, Commute};
use esid_core::model::{simulate_node, Compartment, CompartmentTensor, EpiParameters};
use proptest::prelude::*;
use support::fixtures::{central_parameters, desk_graph};

fn params(n: usize) -> Vec<EpiParameters> {
    vec![EpiParameters::uniform(2, central_parameters()); n]
}

#[test]
fn national_population_is_conserved() {
    let g = desk_graph();
    let run = simulate_graph(&g, &params(4), 100, 0.1).unwrap();
    let total = |day: usize| -> f64 { run.trajectories.iter().map(|t| t[day].total()).sum() };
    let n0 = total(0);
    for day in 0..=100 {
        assert!(((total(day) - n0) / n0).abs() < 1e-9, "day {day}");
    }
    for traj in &run.trajectories {
        for w in traj.windows(2) {
            assert!(w[1].compartment_total(Compartment::Dead) >= w[0].compartment_total(Compartment::Dead) - 1e-12);
            assert!(w[1].as_slice().iter().all(|v| *v >= 0.0));
        }
    }
    assert_eq!(run.over_demand, 0);
}

#[test]
fn edge_order_does_not_matter() {
    let g = desk_graph();
    let mut shuffled = g.clone();
    shuffled.edges.reverse();
    shuffled.edges.swap(0, 3);
    let a = simulate_graph(&g, &params(4), 40, 0.1).unwrap();
    let b = simulate_graph(&shuffled, &params(4), 40, 0.1).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_commuters_decouple_districts() {
    let mut g = desk_graph();
    for e in &mut g.edges {
        e.commuters.iter_mut().for_each(|c| *c = 0.0);
    }
    let run = simulate_graph(&g, &params(4), 30, 0.1).unwrap();
    let p = &params(1)[0];
    for (i, init) in g.initial.iter().enumerate() {
        let node = simulate_node(init, p, &g.contacts, &[], 30, 0.1).unwrap();
        assert_eq!(run.trajectories[i], node, "district {}", g.districts[i].id);
    }
}

#[test]
fn symmetric_districts_stay_identical() {
    let mut g = desk_graph();
    g.districts.truncate(2);
    g.initial.truncate(2);
    g.districts[1].population = g.districts[0].population.clone();
    g.initial[1] = g.initial[0].clone();
    g.edges.retain(|e| {
        ["05315", "05111"].contains(&e.from.as_str()) && ["05315", "05111"].contains(&e.to.as_str())
    });
    for e in &mut g.edges {
        e.commuters = vec![10_000.0, 500.0];
    }
    let run = simulate_graph(&g, &params(2), 60, 0.1).unwrap();
    assert_eq!(run.trajectories[0], run.trajectories[1]);
}

#[test]
fn infection_travels_within_two_days() {
    let g = desk_graph();
    let run = simulate_graph(&g, &params(4), 2, 0.1).unwrap();
    let dus = g.position("05111").unwrap();
    assert_eq!(run.trajectories[dus][0].compartment_total(Compartment::Exposed), 0.0);
    assert!(run.trajectories[dus][2].compartment_total(Compartment::Exposed) > 0.0);
}

fn arb_states() -> impl Strategy<Value = Vec<CompartmentTensor>> {
    prop::collection::vec(prop::collection::vec(0.0..1e5f64, 16), 2..5).prop_map(|vs| {
        vs.into_iter()
            .map(|v| CompartmentTensor::from_values(2, v).unwrap())
            .collect()
    })
}

proptest! {
    #[test]
    fn exchange_conserves_every_compartment(
        states in arb_states(),
        raw_edges in prop::collection::vec((0usize..5, 0usize..5, 0.0..2e5f64, 0.0..2e5f64), 0..8),
    ) {
        let n = states.len();
        let commutes: Vec<Commute> = raw_edges
            .into_iter()
            .filter(|(f, t, _, _)| f % n != t % n)
            .map(|(f, t, a, b)| Commute { from: f % n, to: t % n, commuters: vec![a, b] })
            .collect();
        let mut after = states.clone();
        mobility_exchange(&mut after, &commutes);
        for g in 0..2 {
            for c in Compartment::ALL {
                let before: f64 = states.iter().map(|s| s.get(g, c)).sum();
                let now: f64 = after.iter().map(|s| s.get(g, c)).sum();
                prop_assert!((before - now).abs() <= 1e-12 * before.max(1.0), "{} {} -> {}", c, before, now);
                if !c.is_mobile() {
                    for (s, a) in states.iter().zip(&after) {
                        prop_assert_eq!(s.get(g, c), a.get(g, c));
                    }
                }
            }
        }
        prop_assert!(after.iter().all(|s| s.as_slice().iter().all(|v| *v >= 0.0)));

        let mut reversed: Vec<Commute> = commutes.clone();
        reversed.reverse();
        let mut again = states.clone();
        mobility_exchange(&mut again, &reversed);
        prop_assert_eq!(after, again);
    }
}
