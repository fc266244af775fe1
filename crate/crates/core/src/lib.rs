//! Ranking items from paired comparisons with fewer tasks.
//!
//! [`btl`] fits Bradley-Terry strengths to a set of comparisons. [`crowdc`]
//! ranks items by dividing them into groups, fitting each group, linking
//! the groups through a few pivots per group and interpolating the rest.
//! [`simulate`] generates noisy worker verdicts over a dataset whose true
//! order is known, and [`metrics`] scores a ranking against that order.

pub mod btl;
pub mod comparisons_csv;
pub mod crowdc;
pub mod metrics;
pub mod params;
pub mod simulate;
pub mod types;

pub use btl::{FitConfig, WinMatrix};
pub use crowdc::{run_crowdc, ComparisonSource, CrowdcResult};
pub use params::{validate_parameters, ParameterError, Parameters};
pub use types::{
    dataset_items, Comparison, ExperimentRecord, ItemId, ItemPair, Method, Partition, RunParams, ScoreFlavor,
    ScoreVector,
};
