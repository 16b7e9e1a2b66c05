use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Home,
    School,
    Work,
    Other,
}

impl Location {
    pub const ALL: [Location; 4] = [Location::Home, Location::School, Location::Work, Location::Other];
}

/// Square age-by-age matrix, row-major. Entry `(a, b)` is the daily number
/// of contacts a person in group `a` has with people in group `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ContactMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ContactMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self { n, data: vec![value; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("contacts", "matrix must not be empty"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(
                    format!("contacts row {i}"),
                    format!("expected {n} entries, got {}", row.len()),
                ));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::invalid(
                    format!("contacts row {i}"),
                    format!("entry {v} must be finite and nonnegative"),
                ));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.n..(a + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for ContactMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<ContactMatrix> for Vec<Vec<f64>> {
    fn from(m: ContactMatrix) -> Self {
        m.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactMatrices {
    pub home: ContactMatrix,
    pub school: ContactMatrix,
    pub work: ContactMatrix,
    pub other: ContactMatrix,
}

impl ContactMatrices {
    /// All contacts at one location, the others zero.
    pub fn single_location(location: Location, m: ContactMatrix) -> Self {
        let zero = ContactMatrix::zeros(m.size());
        let mut c = Self {
            home: zero.clone(),
            school: zero.clone(),
            work: zero.clone(),
            other: zero,
        };
        *c.get_mut(location) = m;
        c
    }

    /// Every location contributes `total / 4` to every entry.
    pub fn uniform(n: usize, total: f64) -> Self {
        let m = ContactMatrix::filled(n, total / 4.0);
        Self {
            home: m.clone(),
            school: m.clone(),
            work: m.clone(),
            other: m,
        }
    }

    pub fn get(&self, location: Location) -> &ContactMatrix {
        match location {
            Location::Home => &self.home,
            Location::School => &self.school,
            Location::Work => &self.work,
            Location::Other => &self.other,
        }
    }

    fn get_mut(&mut self, location: Location) -> &mut ContactMatrix {
        match location {
            Location::Home => &mut self.home,
            Location::School => &mut self.school,
            Location::Work => &mut self.work,
            Location::Other => &mut self.other,
        }
    }

    pub fn size(&self) -> usize {
        self.home.size()
    }

    pub fn validate(&self, groups: usize) -> Result<()> {
        for loc in Location::ALL {
            let m = self.get(loc);
            if m.size() != groups {
                return Err(Error::invalid(
                    format!("contacts.{}", serde_name(loc)),
                    format!("matrix side {} does not match {groups} age groups", m.size()),
                ));
            }
        }
        Ok(())
    }

    /// Undamped sum over all locations.
    pub fn total(&self) -> ContactMatrix {
        effective_contacts(self, &[], 0)
    }
}

fn serde_name(loc: Location) -> &'static str {
    match loc {
        Location::Home => "home",
        Location::School => "school",
        Location::Work => "work",
        Location::Other => "other",
    }
}

/// A contact reduction at some locations over the half-open day interval
/// `[start_day, end_day)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    pub locations: Vec<Location>,
    /// Fraction of contacts removed.
    pub strength: f64,
    pub start_day: u32,
    pub end_day: u32,
    /// Age-group indices the reduction applies to; all groups when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_groups: Option<Vec<usize>>,
}

impl Damping {
    pub fn all_locations(strength: f64, start_day: u32, end_day: u32) -> Self {
        Self {
            locations: Location::ALL.to_vec(),
            strength,
            start_day,
            end_day,
            age_groups: None,
        }
    }

    pub fn is_active(&self, day: u32) -> bool {
        self.start_day <= day && day < self.end_day
    }

    fn applies_to(&self, a: usize, b: usize) -> bool {
        match &self.age_groups {
            None => true,
            Some(mask) => mask.contains(&a) || mask.contains(&b),
        }
    }

    pub fn validate(&self, groups: usize) -> Result<()> {
        if self.locations.is_empty() {
            return Err(Error::invalid("locations", "at least one location is required"));
        }
        if !(self.strength.is_finite() && (0.0..=1.0).contains(&self.strength)) {
            return Err(Error::invalid(
                "strength",
                format!("{} must lie in [0, 1]", self.strength),
            ));
        }
        if self.start_day >= self.end_day {
            return Err(Error::invalid(
                "end_day",
                format!("end_day {} must be after start_day {}", self.end_day, self.start_day),
            ));
        }
        if let Some(mask) = &self.age_groups {
            if let Some(g) = mask.iter().find(|g| **g >= groups) {
                return Err(Error::invalid(
                    "age_groups",
                    format!("group index {g} out of range for {groups} groups"),
                ));
            }
        }
        Ok(())
    }
}

/// Validates a damping schedule, prefixing field errors with `dampings[i]`.
pub fn validate_dampings(dampings: &[Damping], groups: usize, prefix: &str) -> Result<()> {
    for (i, d) in dampings.iter().enumerate() {
        d.validate(groups).map_err(|e| match e {
            Error::Invalid { field, reason } => {
                Error::invalid(format!("{prefix}[{i}].{field}"), reason)
            }
            other => other,
        })?;
    }
    Ok(())
}

/// Contact matrix in effect on `day`: the location sum with every active
/// damping multiplying its locations (and age entries) by `1 - strength`.
pub fn effective_contacts(base: &ContactMatrices, dampings: &[Damping], day: u32) -> ContactMatrix {
    let n = base.size();
    let active: Vec<&Damping> = dampings.iter().filter(|d| d.is_active(day)).collect();
    let mut out = ContactMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let mut sum = 0.0;
            for loc in Location::ALL {
                let factor: f64 = active
                    .iter()
                    .filter(|d| d.locations.contains(&loc) && d.applies_to(a, b))
                    .map(|d| 1.0 - d.strength)
                    .product();
                sum += base.get(loc).get(a, b) * factor;
            }
            out.data[a * n + b] = sum;
        }
    }
    out
}
