mod support;

use esid_core::ensemble::{
    member_parameters, run_ensemble, sample_parameters, ParameterRanges, SimulationResult, TrendClass,
    PERCENTILES, TOTAL_GROUP,
};
use esid_core::graph::{simulate_graph, NATIONAL_ID};
use esid_core::model::{Compartment, EpiParameters, FIELDS};
use esid_core::rng::CounterRng;
use support::fixtures::{central_parameters, desk_graph, desk_scenario, fixed_scenario, lockdown};

fn assert_monotone(r: &SimulationResult) {
    let m = &r.metadata;
    for d in 0..m.district_slots() {
        for t in 0..m.days() {
            let blocks: Vec<&[f64]> = (0..PERCENTILES.len()).map(|p| r.block(p, d, t)).collect();
            for k in 0..m.block_len() {
                for p in 1..PERCENTILES.len() {
                    assert!(blocks[p - 1][k] <= blocks[p][k], "cell d{d} t{t} k{k}");
                }
                assert!(blocks[0][k] >= 0.0);
            }
        }
    }
}

#[test]
fn degenerate_ranges_return_the_point() {
    let p = central_parameters();
    let ranges = vec![ParameterRanges::fixed(&p); 2];
    let sampled = sample_parameters(&ranges, &mut CounterRng::new(5, 0)).unwrap();
    assert_eq!(sampled, EpiParameters::uniform(2, p));
}

#[test]
fn samples_stay_in_range_and_repeat() {
    let ranges = vec![ParameterRanges::around(&central_parameters(), 0.3)];
    for member in 0..200 {
        let a = sample_parameters(&ranges, &mut CounterRng::new(11, member)).unwrap();
        let b = sample_parameters(&ranges, &mut CounterRng::new(11, member)).unwrap();
        assert_eq!(a, b);
        let g = &a.groups[0];
        for ((name, _), (v, r)) in FIELDS.iter().zip(g.fields().into_iter().zip(ranges[0].fields())) {
            assert!(r.contains(*v), "{name}: {v} not in {r:?}");
        }
    }
    let s = desk_scenario("x", 4);
    assert_ne!(member_parameters(&s, 2, 0).unwrap(), member_parameters(&s, 2, 1).unwrap());
}

#[test]
fn invalid_range_names_the_field() {
    let mut ranges = vec![ParameterRanges::around(&central_parameters(), 0.1)];
    ranges[0].severe_fraction.max = 1.5;
    let err = sample_parameters(&ranges, &mut CounterRng::new(1, 0)).unwrap_err();
    assert_eq!(err.field(), Some("parameter_ranges[0].severe_fraction"));
}

#[test]
fn single_member_collapses_bands() {
    let mut s = desk_scenario("one", 1);
    s.num_days = 30;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    for p in 1..PERCENTILES.len() {
        for d in 0..r.metadata.district_slots() {
            for t in 0..r.metadata.days() {
                assert_eq!(r.block(p, d, t), r.block(0, d, t));
            }
        }
    }
    // the lone member equals a direct graph run with its parameters
    let g = desk_graph();
    let params = member_parameters(&s, 2, 0).unwrap();
    let run = simulate_graph(&g, &vec![params; 4], 30, 0.1).unwrap();
    let koeln = r.metadata.district_slot("05315").unwrap();
    for t in 0..=30 {
        for g in 0..2 {
            for c in Compartment::ALL {
                assert_eq!(r.value(2, koeln, t, g, c), run.trajectories[koeln][t].get(g, c));
            }
        }
    }
}

#[test]
fn degenerate_ranges_give_zero_width_bands() {
    let mut s = fixed_scenario("fixed", 6);
    s.num_days = 20;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    let (p5, p95) = (0, PERCENTILES.len() - 1);
    for d in 0..r.metadata.district_slots() {
        for t in 0..r.metadata.days() {
            assert_eq!(r.block(p5, d, t), r.block(p95, d, t));
        }
    }
}

#[test]
fn ensemble_invariants() {
    let mut s = desk_scenario("wide", 16);
    s.num_days = 60;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    assert_monotone(&r);
    let m = &r.metadata;
    assert_eq!(m.district_slot(NATIONAL_ID), Some(4));
    assert_eq!(m.group_slot(TOTAL_GROUP), Some(2));

    for d in 0..m.district_slots() {
        for p in 0..PERCENTILES.len() {
            assert_eq!(r.block(p, d, 0), r.block(0, d, 0), "day 0 differs across percentiles");
            for g in 0..m.group_slots() {
                let dead = r.series(p, d, g, Compartment::Dead);
                for w in dead.windows(2) {
                    assert!(w[1] >= w[0] - 1e-12);
                }
            }
        }
    }
    // bands have width somewhere once the epidemic takes off
    let koeln = m.district_slot("05315").unwrap();
    assert!(r.value(4, koeln, 60, 0, Compartment::InfectiousSymptomatic) > r.value(0, koeln, 60, 0, Compartment::InfectiousSymptomatic));
}

#[test]
fn aggregates_are_summed_before_percentiles() {
    let mut s = desk_scenario("agg", 1);
    s.num_days = 25;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    let m = &r.metadata;
    let national = m.district_slot(NATIONAL_ID).unwrap();
    let total = m.group_slot(TOTAL_GROUP).unwrap();
    for t in 0..m.days() {
        for c in Compartment::ALL {
            let by_group: f64 = (0..2).map(|g| r.value(2, 0, t, g, c)).sum();
            assert_eq!(r.value(2, 0, t, total, c), by_group);
            let by_district: f64 = (0..4).map(|d| r.value(2, d, t, 0, c)).sum();
            assert_eq!(r.value(2, national, t, 0, c), by_district);
        }
    }

    // with several members the aggregate is the percentile of per-member sums,
    // which in general differs from summing the group percentiles
    let mut s = desk_scenario("agg", 12);
    s.num_days = 40;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    let mut mismatch = false;
    for t in 0..r.metadata.days() {
        let summed: f64 = (0..2).map(|g| r.value(0, 0, t, g, Compartment::InfectiousSymptomatic)).sum();
        let agg = r.value(0, 0, t, total, Compartment::InfectiousSymptomatic);
        mismatch |= (agg - summed).abs() > 1e-9 * agg.max(1.0);
    }
    assert!(mismatch, "p5 of the total equals the sum of group p5 values everywhere");
}

#[test]
fn repeat_runs_are_bit_identical() {
    let mut s = desk_scenario("rep", 8);
    s.num_days = 30;
    let a = run_ensemble(&s, &desk_graph()).unwrap();
    let b = run_ensemble(&s, &desk_graph()).unwrap();
    assert_eq!(a.values(), b.values());
    s.seed += 1;
    let c = run_ensemble(&s, &desk_graph()).unwrap();
    assert_ne!(a.values(), c.values());
}

#[test]
fn trend_classes() {
    let mut s = desk_scenario("trend", 1);
    s.num_days = 40;
    let r = run_ensemble(&s, &desk_graph()).unwrap();
    let koeln = r.metadata.district_slot("05315").unwrap();
    for c in Compartment::ALL {
        assert_eq!(r.trend(koeln, 0, c, 0).class, TrendClass::Stable);
    }
    assert_eq!(r.trend(koeln, 0, Compartment::InfectiousSymptomatic, 30).class, TrendClass::Increasing);
    assert_eq!(r.trend(koeln, 0, Compartment::Susceptible, 40).class, TrendClass::Decreasing);
    let dus = r.metadata.district_slot("05111").unwrap();
    // zero baseline, infection imported later
    let t = r.trend(dus, 0, Compartment::Exposed, 10);
    assert_eq!(t.change, None);
    assert_eq!(t.class, TrendClass::Increasing);
}

#[test]
fn damping_lowers_the_median() {
    let mut base = fixed_scenario("base", 1);
    base.num_days = 50;
    let mut damped = base.clone();
    damped.dampings.push(lockdown(0.6, 10, 40));
    let a = run_ensemble(&base, &desk_graph()).unwrap();
    let b = run_ensemble(&damped, &desk_graph()).unwrap();
    let national = a.metadata.district_slot(NATIONAL_ID).unwrap();
    let total = a.metadata.group_slot(TOTAL_GROUP).unwrap();
    let ia = a.series(2, national, total, Compartment::InfectiousSymptomatic);
    let ib = b.series(2, national, total, Compartment::InfectiousSymptomatic);
    for day in 0..=10 {
        assert_eq!(ia[day], ib[day]);
    }
    for day in 11..=40 {
        assert!(ib[day] < ia[day], "day {day}");
    }
}
