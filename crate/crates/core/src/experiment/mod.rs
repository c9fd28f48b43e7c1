//! Config-driven experiments producing CSV tables.

mod config;
mod csv;
mod runners;

pub use config::{
    BathConfig, BathKind, ExperimentConfig, ExperimentKind, MinspaceConfig, OutputConfig, ProtocolConfig,
    ProtocolVariant, ResourcesConfig, RunConfig, SystemConfig,
};
pub use csv::{Cell, CsvTable};
pub use runners::{
    build_protocol, run_experiment, run_minspace_check, run_resources, run_thermalise, run_wavepackage,
    ExperimentOutput, ThermaliseSetup, WavepackageSetup,
};
