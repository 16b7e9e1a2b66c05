use super::compartment::{CompartmentTensor, NUM_COMPARTMENTS};
use super::contacts::{effective_contacts, validate_dampings, ContactMatrices, ContactMatrix, Damping};
use super::dynamics::rhs;
use super::params::EpiParameters;
use crate::error::{Error, Result};

/// Default integration step in days.
pub const DEFAULT_DT: f64 = 0.1;

/// Largest clamped mass per step, relative to the group population, that is
/// accepted as round-off.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Result of one Runge-Kutta step.
#[derive(Debug, Clone, PartialEq)]
pub struct Rk4Step {
    pub state: Vec<f64>,
    /// Mass added per entry when negative values were raised to zero.
    pub clamped: Vec<f64>,
}

impl Rk4Step {
    pub fn clamped_total(&self) -> f64 {
        self.clamped.iter().sum()
    }
}

/// One classical fourth-order Runge-Kutta step of an autonomous system.
/// Negative results are clamped to zero and the clamped mass is reported.
pub fn step_rk4<F>(state: &[f64], dt: f64, mut deriv: F) -> Result<Rk4Step>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("{dt} must be positive")));
    }
    let mut eval = |y: &[f64]| -> Result<Vec<f64>> {
        let k = deriv(y)?;
        if k.len() != y.len() {
            return Err(Error::Shape {
                what: "derivative",
                expected: y.len(),
                actual: k.len(),
            });
        }
        match k.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFiniteDerivative { index }),
            None => Ok(k),
        }
    };
    let offset = |k: &[f64], h: f64| -> Vec<f64> {
        state.iter().zip(k).map(|(y, k)| y + h * k).collect()
    };

    let k1 = eval(state)?;
    let k2 = eval(&offset(&k1, dt / 2.0))?;
    let k3 = eval(&offset(&k2, dt / 2.0))?;
    let k4 = eval(&offset(&k3, dt))?;

    let mut next = Vec::with_capacity(state.len());
    let mut clamped = vec![0.0; state.len()];
    for i in 0..state.len() {
        let y = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if y < 0.0 {
            clamped[i] = -y;
            next.push(0.0);
        } else {
            next.push(y);
        }
    }
    Ok(Rk4Step { state: next, clamped })
}

/// Number of integration steps per day; `dt` has to divide one day evenly.
pub fn steps_per_day(dt: f64) -> Result<u32> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(Error::invalid("dt", format!("{dt} must lie in (0, 1]")));
    }
    let steps = (1.0 / dt).round();
    if (steps * dt - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("dt", format!("{dt} does not divide one day evenly")));
    }
    Ok(steps as u32)
}

/// Integrates one district from `day` to `day + 1` with fixed contacts.
pub fn advance_day(
    state: &CompartmentTensor,
    params: &EpiParameters,
    contacts: &ContactMatrix,
    dt: f64,
    steps: u32,
    day: u32,
) -> Result<CompartmentTensor> {
    let groups = state.num_groups();
    let mut current = state.clone();
    for _ in 0..steps {
        let step = step_rk4(current.as_slice(), dt, |y| {
            rhs(&CompartmentTensor::from_raw(groups, y.to_vec()), params, contacts)
                .map(CompartmentTensor::into_values)
        })
        .map_err(|e| match e {
            Error::NonFiniteDerivative { index } => Error::Integration {
                day,
                group: index / NUM_COMPARTMENTS,
                reason: "non-finite derivative".into(),
            },
            other => other,
        })?;

        for g in 0..groups {
            let population = current.group_total(g);
            let clamped: f64 = step.clamped[g * NUM_COMPARTMENTS..(g + 1) * NUM_COMPARTMENTS]
                .iter()
                .sum();
            if clamped > CLAMP_TOLERANCE * population {
                return Err(Error::Integration {
                    day,
                    group: g,
                    reason: format!(
                        "clamped mass {clamped:e} exceeds {CLAMP_TOLERANCE:e} of population {population}"
                    ),
                });
            }
        }
        current = CompartmentTensor::from_raw(groups, step.state);
    }
    Ok(current)
}

/// Checks that parameters, contacts and dampings fit `groups` age groups.
pub fn validate_node_inputs(
    groups: usize,
    params: &EpiParameters,
    contacts: &ContactMatrices,
    dampings: &[Damping],
) -> Result<()> {
    params.validate()?;
    if params.num_groups() != groups {
        return Err(Error::Shape {
            what: "parameter groups",
            expected: groups,
            actual: params.num_groups(),
        });
    }
    contacts.validate(groups)?;
    validate_dampings(dampings, groups, "dampings")
}

/// Simulates one district and returns its state at every integer day
/// `0..=num_days`.
pub fn simulate_node(
    initial: &CompartmentTensor,
    params: &EpiParameters,
    contacts: &ContactMatrices,
    dampings: &[Damping],
    num_days: u32,
    dt: f64,
) -> Result<Vec<CompartmentTensor>> {
    if num_days < 1 {
        return Err(Error::invalid("num_days", "must be at least 1"));
    }
    let steps = steps_per_day(dt)?;
    validate_node_inputs(initial.num_groups(), params, contacts, dampings)?;

    let mut trajectory = Vec::with_capacity(num_days as usize + 1);
    trajectory.push(initial.clone());
    for day in 0..num_days {
        let day_contacts = effective_contacts(contacts, dampings, day);
        let next = advance_day(&trajectory[day as usize], params, &day_contacts, dt, steps, day)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}
