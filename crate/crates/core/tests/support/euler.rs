//! Forward-Euler reference for the single-group compartment chain, written
//! out directly from the flow equations without touching the library's
//! right-hand side or integrator.

#![allow(dead_code)]

use esid_core::model::GroupParameters;

pub fn euler_oracle(
    y0: [f64; 8],
    p: &GroupParameters,
    contacts: f64,
    days: usize,
    h: f64,
) -> Vec<[f64; 8]> {
    let steps = (1.0 / h).round() as usize;
    let mut out = vec![y0];
    let [mut s, mut e, mut c, mut i, mut hh, mut u, mut r, mut d] = y0;
    for _ in 0..days {
        for _ in 0..steps {
            let n = s + e + c + i + hh + u + r;
            let lambda = p.transmission * contacts * (c + p.symptomatic_infectiousness * i) / n;
            let fe = e / p.latent_days;
            let fc = c / p.carrier_days;
            let fi = i / p.infected_days;
            let fh = hh / p.severe_days;
            let fu = u / p.critical_days;
            let ds = -lambda * s;
            let de = lambda * s - fe;
            let dc = fe - fc;
            let di = p.symptomatic_fraction * fc - fi;
            let dh = p.severe_fraction * fi - fh;
            let du = p.critical_fraction * fh - fu;
            let dd = p.death_fraction * fu;
            let dr = (1.0 - p.symptomatic_fraction) * fc
                + (1.0 - p.severe_fraction) * fi
                + (1.0 - p.critical_fraction) * fh
                + (1.0 - p.death_fraction) * fu;
            s += h * ds;
            e += h * de;
            c += h * dc;
            i += h * di;
            hh += h * dh;
            u += h * du;
            r += h * dr;
            d += h * dd;
        }
        out.push([s, e, c, i, hh, u, r, d]);
    }
    out
}

/// Parameters with durations in the range reported for SARS-CoV-2.
pub fn covid_like() -> GroupParameters {
    GroupParameters {
        latent_days: 5.2,
        carrier_days: 4.2,
        infected_days: 8.0,
        severe_days: 12.0,
        critical_days: 14.0,
        symptomatic_fraction: 0.7,
        severe_fraction: 0.1,
        critical_fraction: 0.2,
        death_fraction: 0.3,
        transmission: 0.03,
        symptomatic_infectiousness: 0.5,
    }
}

pub const OUTBREAK: [f64; 8] = [99_000.0, 400.0, 300.0, 200.0, 50.0, 20.0, 30.0, 0.0];

pub const DAILY_CONTACTS: f64 = 10.0;

/// Largest relative deviation over all compartments and days.
pub fn max_relative_deviation(a: &[[f64; 8]], b: &[[f64; 8]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(x, y)| if *y == 0.0 { x.abs() } else { ((x - y) / y).abs() })
        .fold(0.0, f64::max)
}
