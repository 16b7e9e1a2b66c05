//! Age-stratified compartment model for a single district.

mod compartment;
mod contacts;
mod dynamics;
mod integrate;
mod params;

pub use compartment::{AgeGroup, AgeGroupSpec, Compartment, CompartmentTensor, NUM_COMPARTMENTS};
pub use contacts::{
    effective_contacts, validate_dampings, ContactMatrices, ContactMatrix, Damping, Location,
};
pub use dynamics::{force_of_infection, rhs};
pub use integrate::{
    advance_day, simulate_node, step_rk4, steps_per_day, validate_node_inputs, Rk4Step,
    CLAMP_TOLERANCE, DEFAULT_DT,
};
pub use params::{EpiParameters, FieldDomain, GroupParameters, FIELDS};
