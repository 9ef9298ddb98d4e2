//! Closed-loop integration, run diagnostics and parameter sweeps.

mod config;
mod diagnostics;
mod sim;
mod sweep;

use thiserror::Error;

pub use config::{EnvelopeSpec, InitialState, LeaderRefs, ScenarioConfig, DEFAULT_BLOWUP, DEFAULT_DT, DEFAULT_SAMPLE_MS};
pub use diagnostics::{
    containment_error, containment_errors, diagnose, lyapunov_energy, lyapunov_monitor, phi_tilde_bound,
    sharing_dispersion, sup_over, tail_window, DiagnosticsOptions, DiagnosticsReport, Flags, MonitorReport, PhaseTail,
    PhiTildeReport, DISPERSION_TOL, FREQUENCY_TOL_HZ, MONITOR_REL_TOL, REPORT_SCHEMA_VERSION, VOLTAGE_MARGIN,
};
pub use sim::{initial_state, run, step, Layout, Rk4, RunStatus, Sample, TimeSeries};
pub use sweep::{sweep_beta, SweepRow};

use crate::linalg::LinalgError;
use crate::netgraph::GraphError;
use crate::plant::PlantError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("state entry {index} is not finite at t = {t}")]
    NonFiniteState { index: usize, t: f64 },
    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
}
