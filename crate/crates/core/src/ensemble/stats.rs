use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type-7 percentile of an ascending, non-empty slice.
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    let (a, b) = (sorted[lo], sorted[hi]);
    (a + (rank - lo as f64) * (b - a)).min(b)
}

/// Linear interpolation between the closest order statistics at rank
/// `q / 100 * (n - 1)`.
pub fn percentile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::invalid("q", format!("{q} must lie in [0, 100]")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("samples", "NaN in sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, q))
}

/// Relative changes below this magnitude count as stable.
pub const STABLE_BAND: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendClass {
    Increasing,
    Stable,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// `(now - start) / start`; absent when the start value is zero.
    pub change: Option<f64>,
    pub class: TrendClass,
}

/// Classifies the change of a median series from its start value.
pub fn classify_trend(start: f64, now: f64) -> Trend {
    if start > 0.0 {
        let r = (now - start) / start;
        let class = if r.abs() < STABLE_BAND {
            TrendClass::Stable
        } else if r > 0.0 {
            TrendClass::Increasing
        } else {
            TrendClass::Decreasing
        };
        Trend { change: Some(r), class }
    } else {
        Trend {
            change: None,
            class: if now > 0.0 { TrendClass::Increasing } else { TrendClass::Stable },
        }
    }
}
