use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphModel;
use crate::model::{validate_dampings, Damping, FieldDomain, GroupParameters, DEFAULT_DT};

/// Closed interval `[min, max]`. Deserializes from `{"min": a, "max": b}` or
/// from a bare number for a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "IntervalRepr")]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntervalRepr {
    Fixed(f64),
    Range { min: f64, max: f64 },
}

impl From<IntervalRepr> for Interval {
    fn from(r: IntervalRepr) -> Self {
        match r {
            IntervalRepr::Fixed(v) => Interval { min: v, max: v },
            IntervalRepr::Range { min, max } => Interval { min, max },
        }
    }
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn fixed(v: f64) -> Self {
        Self { min: v, max: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }
}

/// Sampling ranges for one age group.
pub type ParameterRanges = GroupParameters<Interval>;

impl ParameterRanges {
    /// Degenerate ranges pinned at `p`.
    pub fn fixed(p: &GroupParameters) -> Self {
        p.try_map::<_, ()>(|_, _, v| Ok(Interval::fixed(*v))).expect("infallible")
    }

    /// Ranges spanning `p * (1 - rel)` to `p * (1 + rel)`, clipped to each
    /// field's domain.
    pub fn around(p: &GroupParameters, rel: f64) -> Self {
        p.try_map::<_, ()>(|_, domain, v| {
            let (mut lo, mut hi) = (v * (1.0 - rel), v * (1.0 + rel));
            if domain == FieldDomain::Probability {
                lo = lo.max(0.0);
                hi = hi.min(1.0);
            }
            Ok(Interval::new(lo.max(0.0), hi))
        })
        .expect("infallible")
    }

    pub fn validate(&self) -> Result<()> {
        self.try_map(|name, domain, r| {
            if !(r.min.is_finite() && r.max.is_finite()) {
                return Err(Error::invalid(name, "bounds must be finite"));
            }
            if r.min > r.max {
                return Err(Error::invalid(name, format!("min {} exceeds max {}", r.min, r.max)));
            }
            if !domain.contains(r.min) || !domain.contains(r.max) {
                return Err(Error::invalid(
                    name,
                    format!("range [{}, {}] {}", r.min, r.max, domain.describe()),
                ));
            }
            Ok(())
        })
        .map(|_| ())
    }
}

pub const DEFAULT_MEMBERS: u32 = 32;

fn default_members() -> u32 {
    DEFAULT_MEMBERS
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// A named simulation configuration compared side by side with others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDefinition {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Display color hint, e.g. `"#1f77b4"` or `"blue"`.
    #[serde(default)]
    pub color: String,
    pub start_date: NaiveDate,
    pub num_days: u32,
    /// One entry per age group, or a single entry shared by all groups.
    pub parameter_ranges: Vec<ParameterRanges>,
    #[serde(default)]
    pub dampings: Vec<Damping>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub district_dampings: BTreeMap<String, Vec<Damping>>,
    /// Reference to the district graph, usually a file name.
    pub graph: String,
    #[serde(default = "default_members")]
    pub members: u32,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

/// Ids are used as file and URL path segments.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'.')
        && !id.starts_with('.')
}

impl ScenarioDefinition {
    /// Ranges for every age group, broadcasting a single shared entry.
    pub fn ranges_for(&self, groups: usize) -> Result<Vec<ParameterRanges>> {
        match self.parameter_ranges.len() {
            1 => Ok(vec![self.parameter_ranges[0]; groups]),
            n if n == groups => Ok(self.parameter_ranges.clone()),
            n => Err(Error::invalid(
                "parameter_ranges",
                format!("expected 1 or {groups} entries, got {n}"),
            )),
        }
    }

    /// Checks the scenario on its own and against the graph's age groups.
    pub fn validate(&self, groups: usize) -> Result<()> {
        if !is_valid_id(&self.id) {
            return Err(Error::invalid("id", format!("'{}' is not a valid identifier", self.id)));
        }
        if self.num_days < 1 {
            return Err(Error::invalid("num_days", "must be at least 1"));
        }
        if self.members < 1 {
            return Err(Error::invalid("members", "ensemble needs at least one member"));
        }
        crate::model::steps_per_day(self.dt)?;
        for (i, r) in self.ranges_for(groups)?.iter().enumerate() {
            r.validate().map_err(|e| match e {
                Error::Invalid { field, reason } => {
                    Error::invalid(format!("parameter_ranges[{i}].{field}"), reason)
                }
                other => other,
            })?;
        }
        validate_dampings(&self.dampings, groups, "dampings")?;
        for (id, d) in &self.district_dampings {
            validate_dampings(d, groups, &format!("district_dampings.{id}"))?;
        }
        Ok(())
    }

    /// The graph with this scenario's intervention schedule applied.
    pub fn apply_to(&self, graph: &GraphModel) -> GraphModel {
        let mut g = graph.clone();
        g.dampings = self.dampings.clone();
        g.district_dampings = self.district_dampings.clone();
        g
    }
}
