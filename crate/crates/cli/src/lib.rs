//! Experiment tooling around `crowdc-core`: grid sweeps over simulated
//! workers, summary tables and plots, and ranking of recorded comparisons.

pub mod config;
pub mod plot;
pub mod rank;
pub mod results;
pub mod seeds;
pub mod sweep;

pub use config::{parse_config, SweepConfig};
pub use plot::emit_plots;
pub use sweep::{run_sweep, SweepOptions, SweepStatus};
