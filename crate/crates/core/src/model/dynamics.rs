use super::compartment::{Compartment, CompartmentTensor};
use super::contacts::ContactMatrix;
use super::params::EpiParameters;
use crate::error::{Error, Result};

use Compartment::*;

/// Per-group rate at which susceptibles become exposed (1/day):
/// `transmission_a * sum_b contacts[a][b] * (C_b + xi_b * I_b) / N_b`,
/// where `N_b` counts the living members of group `b`.
pub fn force_of_infection(
    state: &CompartmentTensor,
    params: &EpiParameters,
    contacts: &ContactMatrix,
) -> Result<Vec<f64>> {
    let n = state.num_groups();
    check_shapes(n, params, contacts)?;

    let mut pressure = vec![0.0; n];
    for b in 0..n {
        let living = state.living(b);
        let infectious = state.get(b, InfectiousNonSymptomatic)
            + params.groups[b].symptomatic_infectiousness * state.get(b, InfectiousSymptomatic);
        if living > 0.0 {
            pressure[b] = infectious / living;
        } else if (0..n).any(|a| contacts.get(a, b) > 0.0) {
            return Err(Error::EmptyGroup { group: b });
        }
    }

    Ok((0..n)
        .map(|a| {
            let weighted: f64 = contacts.row(a).iter().zip(&pressure).map(|(c, p)| c * p).sum();
            params.groups[a].transmission * weighted
        })
        .collect())
}

/// Time derivative of every compartment (persons/day).
pub fn rhs(
    state: &CompartmentTensor,
    params: &EpiParameters,
    contacts: &ContactMatrix,
) -> Result<CompartmentTensor> {
    let lambda = force_of_infection(state, params, contacts)?;
    let mut out = CompartmentTensor::zeros(state.num_groups());
    for (g, p) in params.groups.iter().enumerate() {
        let x = state.group(g);
        let infection = lambda[g] * x[Susceptible.index()];
        let leave_e = x[Exposed.index()] / p.latent_days;
        let leave_c = x[InfectiousNonSymptomatic.index()] / p.carrier_days;
        let leave_i = x[InfectiousSymptomatic.index()] / p.infected_days;
        let leave_h = x[InfectedSevere.index()] / p.severe_days;
        let leave_u = x[InfectiousCritical.index()] / p.critical_days;

        let d = out.group_mut(g);
        d[Susceptible.index()] = -infection;
        d[Exposed.index()] = infection - leave_e;
        d[InfectiousNonSymptomatic.index()] = leave_e - leave_c;
        d[InfectiousSymptomatic.index()] = p.symptomatic_fraction * leave_c - leave_i;
        d[InfectedSevere.index()] = p.severe_fraction * leave_i - leave_h;
        d[InfectiousCritical.index()] = p.critical_fraction * leave_h - leave_u;
        d[Dead.index()] = p.death_fraction * leave_u;
        d[Recovered.index()] = (1.0 - p.symptomatic_fraction) * leave_c
            + (1.0 - p.severe_fraction) * leave_i
            + (1.0 - p.critical_fraction) * leave_h
            + (1.0 - p.death_fraction) * leave_u;
    }
    Ok(out)
}

fn check_shapes(n: usize, params: &EpiParameters, contacts: &ContactMatrix) -> Result<()> {
    if params.num_groups() != n {
        return Err(Error::Shape {
            what: "parameter groups",
            expected: n,
            actual: params.num_groups(),
        });
    }
    if contacts.size() != n {
        return Err(Error::Shape {
            what: "contact matrix",
            expected: n,
            actual: contacts.size(),
        });
    }
    Ok(())
}
