//! Parameter ensembles and their percentile bands.

mod result;
mod run;
mod scenario;
mod stats;

pub use result::{
    percentile_index, DistrictLabel, ResultMetadata, SimulationResult, PERCENTILES, TOTAL_GROUP,
};
pub use run::{member_parameters, run_ensemble, sample_parameters};
pub use scenario::{is_valid_id, Interval, ParameterRanges, ScenarioDefinition, DEFAULT_MEMBERS};
pub use stats::{classify_trend, percentile, Trend, TrendClass, STABLE_BAND};
