pub mod euler;
pub mod fixtures;
