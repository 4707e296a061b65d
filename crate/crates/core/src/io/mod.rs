//! Configuration files, snapshots and diagnostics streams.

pub mod config;
pub mod csv;
pub mod snapshot;

pub use config::{
    load_config, parse_config, preset_state, FieldSpec, GridSpec, InitialSpec, OutputSpec, Preset,
    RunConfig,
};
pub use csv::{csv_row, CsvSink, CSV_HEADER};
pub use snapshot::{parse_snapshot, read_snapshot, snapshot_to_string, write_snapshot};

/// Shortest decimal form that parses back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}
