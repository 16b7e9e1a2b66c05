use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain a parameter value must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldDomain {
    /// Strictly positive duration in days.
    Duration,
    /// Probability in `[0, 1]`.
    Probability,
    /// Nonnegative scale.
    NonNegative,
}

impl FieldDomain {
    pub fn contains(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                FieldDomain::Duration => v > 0.0,
                FieldDomain::Probability => (0.0..=1.0).contains(&v),
                FieldDomain::NonNegative => v >= 0.0,
            }
    }

    pub fn describe(self) -> &'static str {
        match self {
            FieldDomain::Duration => "must be a positive number of days",
            FieldDomain::Probability => "must lie in [0, 1]",
            FieldDomain::NonNegative => "must be nonnegative",
        }
    }
}

/// Per-age-group disease parameters, generic over the value type so the
/// same layout carries point values (`f64`) and sampling ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupParameters<T = f64> {
    /// Mean time in E before becoming infectious.
    pub latent_days: T,
    /// Mean time in C (infectious, not symptomatic).
    pub carrier_days: T,
    /// Mean time in I (symptomatic).
    pub infected_days: T,
    /// Mean time in H (severe).
    pub severe_days: T,
    /// Mean time in U (critical).
    pub critical_days: T,
    /// Fraction of C that develop symptoms.
    pub symptomatic_fraction: T,
    /// Fraction of I that become severe.
    pub severe_fraction: T,
    /// Fraction of H that become critical.
    pub critical_fraction: T,
    /// Fraction of U that die.
    pub death_fraction: T,
    /// Transmission probability per contact.
    pub transmission: T,
    /// Infectiousness of symptomatic relative to non-symptomatic cases.
    pub symptomatic_infectiousness: T,
}

pub const FIELDS: [(&str, FieldDomain); 11] = [
    ("latent_days", FieldDomain::Duration),
    ("carrier_days", FieldDomain::Duration),
    ("infected_days", FieldDomain::Duration),
    ("severe_days", FieldDomain::Duration),
    ("critical_days", FieldDomain::Duration),
    ("symptomatic_fraction", FieldDomain::Probability),
    ("severe_fraction", FieldDomain::Probability),
    ("critical_fraction", FieldDomain::Probability),
    ("death_fraction", FieldDomain::Probability),
    ("transmission", FieldDomain::NonNegative),
    ("symptomatic_infectiousness", FieldDomain::Probability),
];

impl<T> GroupParameters<T> {
    /// Fields in canonical order, matching [`FIELDS`].
    pub fn fields(&self) -> [&T; 11] {
        [
            &self.latent_days,
            &self.carrier_days,
            &self.infected_days,
            &self.severe_days,
            &self.critical_days,
            &self.symptomatic_fraction,
            &self.severe_fraction,
            &self.critical_fraction,
            &self.death_fraction,
            &self.transmission,
            &self.symptomatic_infectiousness,
        ]
    }

    /// Applies `f` to every field in canonical order.
    pub fn try_map<U, E>(
        &self,
        mut f: impl FnMut(&'static str, FieldDomain, &T) -> Result<U, E>,
    ) -> Result<GroupParameters<U>, E> {
        let mut it = FIELDS.iter();
        let mut next = |v: &T| {
            let (name, domain) = it.next().expect("field count");
            f(name, *domain, v)
        };
        Ok(GroupParameters {
            latent_days: next(&self.latent_days)?,
            carrier_days: next(&self.carrier_days)?,
            infected_days: next(&self.infected_days)?,
            severe_days: next(&self.severe_days)?,
            critical_days: next(&self.critical_days)?,
            symptomatic_fraction: next(&self.symptomatic_fraction)?,
            severe_fraction: next(&self.severe_fraction)?,
            critical_fraction: next(&self.critical_fraction)?,
            death_fraction: next(&self.death_fraction)?,
            transmission: next(&self.transmission)?,
            symptomatic_infectiousness: next(&self.symptomatic_infectiousness)?,
        })
    }
}

impl GroupParameters<f64> {
    pub fn validate(&self) -> Result<()> {
        for ((name, domain), v) in FIELDS.iter().zip(self.fields()) {
            if !domain.contains(*v) {
                return Err(Error::invalid(*name, format!("{v} {}", domain.describe())));
            }
        }
        Ok(())
    }
}

impl Default for GroupParameters<f64> {
    /// Plausible values for a respiratory virus; mainly useful in tests and examples.
    fn default() -> Self {
        Self {
            latent_days: 3.0,
            carrier_days: 3.0,
            infected_days: 7.0,
            severe_days: 8.0,
            critical_days: 10.0,
            symptomatic_fraction: 0.7,
            severe_fraction: 0.1,
            critical_fraction: 0.2,
            death_fraction: 0.3,
            transmission: 0.05,
            symptomatic_infectiousness: 0.5,
        }
    }
}

/// Disease parameters for every age group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpiParameters {
    pub groups: Vec<GroupParameters>,
}

impl EpiParameters {
    pub fn new(groups: Vec<GroupParameters>) -> Result<Self> {
        let p = Self { groups };
        p.validate()?;
        Ok(p)
    }

    /// The same parameters for `n` groups.
    pub fn uniform(n: usize, group: GroupParameters) -> Self {
        Self {
            groups: vec![group; n],
        }
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::invalid("parameters", "no age groups"));
        }
        for (i, g) in self.groups.iter().enumerate() {
            g.validate().map_err(|e| match e {
                Error::Invalid { field, reason } => {
                    Error::invalid(format!("parameters[{i}].{field}"), reason)
                }
                other => other,
            })?;
        }
        Ok(())
    }
}
