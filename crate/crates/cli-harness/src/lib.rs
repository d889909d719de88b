//! Configuration, preset catalog and ε-sweep orchestration for the slab
//! transport laboratory. The `slab-lab` binary is a thin wrapper.

pub mod config;
pub mod experiment;
pub mod expr;
pub mod output;
pub mod presets;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, CheckName, DataSpec, ExperimentConfig, InlineData, ParsedConfig};
pub use experiment::{run_experiment, CheckOutcome, ComponentNorms, EpsilonRow, ExperimentResult};
pub use presets::{build_problem, certify, find_preset, Preset, ProblemData, PRESETS};

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "SLAB_LAB_OUT";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("unknown preset `{0}` (see `slab-lab presets list`)")]
    UnknownPreset(String),
    #[error("bad expression {0}")]
    Expression(String),
    #[error("data rejected: {0}")]
    Hierarchy(#[from] diffusion_hierarchy::HierarchyError),
    #[error(transparent)]
    Transport(#[from] transport_solver::TransportError),
    #[error(transparent)]
    Milne(#[from] milne_layer::MilneError),
    #[error(transparent)]
    Lab(#[from] remainder_lab::LabError),
    #[error(transparent)]
    Core(#[from] phase_core::CoreError),
    #[error("i/o: {0}")]
    Io(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
