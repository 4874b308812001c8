//! Parameter sweeps driven by INI configs, CSV output and self-validation.
//!
//! Built-in presets (`fig1a`, `fig1b`, `fig2a`, `fig2b`) can be used directly
//! or included from a user config and overridden key by key.

pub mod config;
mod presets;
mod sweep;
pub mod validate;

pub use config::{ConfigError, RawConfig};
pub use presets::names as preset_names;
pub use sweep::{
    run_sweep, write_csv, Axis, McColumns, OperatingPoint, RowStatus, SweepRow, SweepSpec,
    CSV_COLUMNS,
};
pub use validate::{run_validation, CheckResult, ValidationReport};
