//! Configuration, time-series and checkpoint files.

pub mod checkpoint;
pub mod config;
pub mod timeseries;

pub use checkpoint::{read_checkpoint, read_checkpoint_on, write_checkpoint};
pub use config::{parse_config, to_canonical_toml};
pub use timeseries::{read_timeseries, write_timeseries, TimeseriesRow};
