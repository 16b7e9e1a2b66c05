use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disease states of the base model, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Compartment {
    #[serde(rename = "S")]
    Susceptible,
    #[serde(rename = "E")]
    Exposed,
    #[serde(rename = "C")]
    InfectiousNonSymptomatic,
    #[serde(rename = "I")]
    InfectiousSymptomatic,
    #[serde(rename = "H")]
    InfectedSevere,
    #[serde(rename = "U")]
    InfectiousCritical,
    #[serde(rename = "R")]
    Recovered,
    #[serde(rename = "D")]
    Dead,
}

pub const NUM_COMPARTMENTS: usize = 8;

impl Compartment {
    pub const ALL: [Compartment; NUM_COMPARTMENTS] = [
        Compartment::Susceptible,
        Compartment::Exposed,
        Compartment::InfectiousNonSymptomatic,
        Compartment::InfectiousSymptomatic,
        Compartment::InfectedSevere,
        Compartment::InfectiousCritical,
        Compartment::Recovered,
        Compartment::Dead,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn code(self) -> &'static str {
        match self {
            Compartment::Susceptible => "S",
            Compartment::Exposed => "E",
            Compartment::InfectiousNonSymptomatic => "C",
            Compartment::InfectiousSymptomatic => "I",
            Compartment::InfectedSevere => "H",
            Compartment::InfectiousCritical => "U",
            Compartment::Recovered => "R",
            Compartment::Dead => "D",
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Compartment::Susceptible => "Susceptible",
            Compartment::Exposed => "Exposed",
            Compartment::InfectiousNonSymptomatic => "Infectious non-symptomatic",
            Compartment::InfectiousSymptomatic => "Infectious symptomatic",
            Compartment::InfectedSevere => "Infected Severe",
            Compartment::InfectiousCritical => "Infectious Critical",
            Compartment::Recovered => "Recovered",
            Compartment::Dead => "Dead",
        }
    }

    /// Compartments whose members commute between districts.
    pub const fn is_mobile(self) -> bool {
        matches!(
            self,
            Compartment::Susceptible
                | Compartment::Exposed
                | Compartment::InfectiousNonSymptomatic
                | Compartment::Recovered
        )
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Compartment {
    type Err = Error;

    /// Accepts the one-letter code or the display name, ignoring case,
    /// spaces, dashes and underscores.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '-' | '_'))
            .flat_map(char::to_lowercase)
            .collect();
        Compartment::ALL
            .into_iter()
            .find(|c| {
                c.code().eq_ignore_ascii_case(&key)
                    || c.name().replace([' ', '-'], "").to_lowercase() == key
            })
            .ok_or_else(|| Error::invalid("compartment", format!("unknown compartment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeGroup {
    pub label: String,
    /// Inclusive lower bound in years.
    pub min_age: u32,
    /// Exclusive upper bound in years; `None` for an open-ended last group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_age: Option<u32>,
}

/// Ordered, non-overlapping age strata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AgeGroup>", into = "Vec<AgeGroup>")]
pub struct AgeGroupSpec {
    groups: Vec<AgeGroup>,
}

impl AgeGroupSpec {
    pub fn new(groups: Vec<AgeGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("age_groups", "at least one age group is required"));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.label.trim().is_empty() {
                return Err(Error::invalid(format!("age_groups[{i}].label"), "empty label"));
            }
            if groups[..i].iter().any(|o| o.label == g.label) {
                return Err(Error::invalid(
                    format!("age_groups[{i}].label"),
                    format!("duplicate label '{}'", g.label),
                ));
            }
            if let Some(max) = g.max_age {
                if max <= g.min_age {
                    return Err(Error::invalid(
                        format!("age_groups[{i}]"),
                        "upper bound must exceed lower bound",
                    ));
                }
            }
            if i > 0 {
                let prev = &groups[i - 1];
                match prev.max_age {
                    Some(prev_max) if prev_max <= g.min_age => {}
                    _ => {
                        return Err(Error::invalid(
                            format!("age_groups[{i}]"),
                            "groups must be ascending and non-overlapping",
                        ))
                    }
                }
            }
        }
        Ok(Self { groups })
    }

    /// A single open-ended group covering all ages.
    pub fn single(label: &str) -> Self {
        Self {
            groups: vec![AgeGroup {
                label: label.to_string(),
                min_age: 0,
                max_age: None,
            }],
        }
    }

    /// Contiguous groups from a list of `(label, min_age)`; the last is open-ended.
    pub fn from_bounds(bounds: &[(&str, u32)]) -> Result<Self> {
        let groups = bounds
            .iter()
            .enumerate()
            .map(|(i, (label, min))| AgeGroup {
                label: label.to_string(),
                min_age: *min,
                max_age: bounds.get(i + 1).map(|(_, next)| *next),
            })
            .collect();
        Self::new(groups)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[AgeGroup] {
        &self.groups
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|g| g.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.label == label)
    }
}

impl TryFrom<Vec<AgeGroup>> for AgeGroupSpec {
    type Error = Error;

    fn try_from(groups: Vec<AgeGroup>) -> Result<Self> {
        Self::new(groups)
    }
}

impl From<AgeGroupSpec> for Vec<AgeGroup> {
    fn from(spec: AgeGroupSpec) -> Self {
        spec.groups
    }
}

/// Person counts per (age group, compartment) for one district at one instant.
///
/// Stored group-major: the eight compartments of group 0, then group 1, ...
#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentTensor {
    groups: usize,
    values: Vec<f64>,
}

impl CompartmentTensor {
    pub fn zeros(groups: usize) -> Self {
        Self {
            groups,
            values: vec![0.0; groups * NUM_COMPARTMENTS],
        }
    }

    /// Everybody susceptible.
    pub fn susceptible(population: &[f64]) -> Self {
        let mut t = Self::zeros(population.len());
        for (g, &n) in population.iter().enumerate() {
            t.set(g, Compartment::Susceptible, n);
        }
        t
    }

    /// Builds a tensor from group-major values, checking shape, sign and finiteness.
    pub fn from_values(groups: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != groups * NUM_COMPARTMENTS {
            return Err(Error::Shape {
                what: "compartment tensor",
                expected: groups * NUM_COMPARTMENTS,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                format!(
                    "state[{}].{}",
                    i / NUM_COMPARTMENTS,
                    Compartment::ALL[i % NUM_COMPARTMENTS]
                ),
                format!("value {} must be finite and nonnegative", values[i]),
            ));
        }
        Ok(Self { groups, values })
    }

    /// Same as [`from_values`](Self::from_values) without validation; for
    /// intermediate integration states.
    pub(crate) fn from_raw(groups: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), groups * NUM_COMPARTMENTS);
        Self { groups, values }
    }

    pub fn num_groups(&self) -> usize {
        self.groups
    }

    pub fn get(&self, group: usize, c: Compartment) -> f64 {
        self.values[group * NUM_COMPARTMENTS + c.index()]
    }

    pub fn set(&mut self, group: usize, c: Compartment, value: f64) {
        self.values[group * NUM_COMPARTMENTS + c.index()] = value;
    }

    pub fn group(&self, group: usize) -> &[f64] {
        &self.values[group * NUM_COMPARTMENTS..(group + 1) * NUM_COMPARTMENTS]
    }

    pub(crate) fn group_mut(&mut self, group: usize) -> &mut [f64] {
        &mut self.values[group * NUM_COMPARTMENTS..(group + 1) * NUM_COMPARTMENTS]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// All eight compartments of one group, including the dead.
    pub fn group_total(&self, group: usize) -> f64 {
        self.group(group).iter().sum()
    }

    /// Members of a group who still take part in contacts (everyone but D).
    pub fn living(&self, group: usize) -> f64 {
        self.group(group)[..Compartment::Dead.index()].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn compartment_total(&self, c: Compartment) -> f64 {
        (0..self.groups).map(|g| self.get(g, c)).sum()
    }
}
