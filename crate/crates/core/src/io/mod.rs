//! Run configuration, particle snapshots and probe output.

mod config;
mod output;

pub use config::{parse_config, RunConfig, SnapshotFormat};
pub use output::{
    von_mises_strain, write_frame, write_measurements, write_probe, write_snapshot_csv, write_snapshot_vtk,
    SNAPSHOT_COLUMNS,
};
