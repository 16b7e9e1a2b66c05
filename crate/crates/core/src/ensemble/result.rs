use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NATIONAL_ID;
use crate::model::{Compartment, NUM_COMPARTMENTS};

use super::stats::{classify_trend, Trend};

/// Percentiles stored for every cell.
pub const PERCENTILES: [u8; 5] = [5, 25, 50, 75, 95];

/// Group selector label for the sum over all age groups.
pub const TOTAL_GROUP: &str = "total";

pub fn percentile_index(p: u8) -> Option<usize> {
    PERCENTILES.iter().position(|q| *q == p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrictLabel {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMetadata {
    pub scenario_id: String,
    pub seed: u64,
    pub members: u32,
    pub created_at: DateTime<Utc>,
    pub start_date: NaiveDate,
    pub num_days: u32,
    pub percentiles: Vec<u8>,
    /// Simulated districts; the national aggregate follows them under
    /// [`NATIONAL_ID`].
    pub districts: Vec<DistrictLabel>,
    /// Age-group labels; the all-ages aggregate follows them under
    /// [`TOTAL_GROUP`].
    pub age_groups: Vec<String>,
    pub compartments: Vec<Compartment>,
}

impl ResultMetadata {
    pub fn district_slots(&self) -> usize {
        self.districts.len() + 1
    }

    pub fn group_slots(&self) -> usize {
        self.age_groups.len() + 1
    }

    pub fn days(&self) -> usize {
        self.num_days as usize + 1
    }

    /// Values in one (percentile, district, day) block.
    pub fn block_len(&self) -> usize {
        self.group_slots() * NUM_COMPARTMENTS
    }

    pub fn len(&self) -> usize {
        PERCENTILES.len() * self.district_slots() * self.days() * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slot of a district id; [`NATIONAL_ID`] maps to the aggregate slot.
    pub fn district_slot(&self, id: &str) -> Option<usize> {
        if id == NATIONAL_ID {
            return Some(self.districts.len());
        }
        self.districts.iter().position(|d| d.id == id)
    }

    pub fn district_id(&self, slot: usize) -> &str {
        self.districts.get(slot).map_or(NATIONAL_ID, |d| d.id.as_str())
    }

    /// Slot of an age-group label; [`TOTAL_GROUP`] maps to the aggregate slot.
    pub fn group_slot(&self, label: &str) -> Option<usize> {
        if label == TOTAL_GROUP {
            return Some(self.age_groups.len());
        }
        self.age_groups.iter().position(|g| g == label)
    }

    pub fn group_label(&self, slot: usize) -> &str {
        self.age_groups.get(slot).map_or(TOTAL_GROUP, String::as_str)
    }

    pub fn date_of(&self, day: u32) -> NaiveDate {
        self.start_date + chrono::Days::new(day as u64)
    }

    /// Offset of the block for `(percentile index, district slot, day)`.
    pub fn block_offset(&self, p: usize, district: usize, day: usize) -> usize {
        ((p * self.district_slots() + district) * self.days() + day) * self.block_len()
    }
}

/// Percentile-banded simulation output indexed by
/// (percentile, district, day, age group, compartment).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub metadata: ResultMetadata,
    values: Vec<f64>,
}

impl SimulationResult {
    pub fn from_parts(metadata: ResultMetadata, values: Vec<f64>) -> Result<Self> {
        if metadata.percentiles != PERCENTILES {
            return Err(Error::invalid("percentiles", format!("expected {PERCENTILES:?}")));
        }
        if metadata.compartments != Compartment::ALL {
            return Err(Error::invalid("compartments", "expected the eight canonical compartments"));
        }
        if values.len() != metadata.len() {
            return Err(Error::Shape {
                what: "result values",
                expected: metadata.len(),
                actual: values.len(),
            });
        }
        Ok(Self { metadata, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn block(&self, p: usize, district: usize, day: usize) -> &[f64] {
        let off = self.metadata.block_offset(p, district, day);
        &self.values[off..off + self.metadata.block_len()]
    }

    pub fn value(&self, p: usize, district: usize, day: usize, group: usize, c: Compartment) -> f64 {
        self.block(p, district, day)[group * NUM_COMPARTMENTS + c.index()]
    }

    /// Values over all days for one percentile.
    pub fn series(&self, p: usize, district: usize, group: usize, c: Compartment) -> Vec<f64> {
        (0..self.metadata.days()).map(|d| self.value(p, district, d, group, c)).collect()
    }

    /// Median change between day 0 and `day`.
    pub fn trend(&self, district: usize, group: usize, c: Compartment, day: usize) -> Trend {
        let median = percentile_index(50).expect("median stored");
        classify_trend(
            self.value(median, district, 0, group, c),
            self.value(median, district, day, group, c),
        )
    }
}
