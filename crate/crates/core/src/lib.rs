//! Simulation of cooperative secondary control for islanded AC microgrids
//! under false-data-injection attacks on the control inputs.

pub mod attack;
pub mod control;
pub mod engine;
pub mod linalg;
pub mod netgraph;
pub mod plant;
pub mod shell;
