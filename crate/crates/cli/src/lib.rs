//! Configuration-driven experiment runner for `maglab`.

pub mod config;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::{Experiment, ExperimentConfig, Tolerances};
pub use report::{emit_report, Format};
pub use runner::{run, RunOutput};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FLAGGED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INTERNAL: i32 = 3;
}
