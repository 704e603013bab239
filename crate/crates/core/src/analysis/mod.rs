//! Error measures, the manufactured solution, regime diagnostics and the two
//! benchmark drivers.

pub mod channel;
pub mod manufactured;
pub mod norms;
pub mod regime;
pub mod study;

pub use channel::{channel_benchmark, ChannelConfig, ChannelResult, Cutline};
pub use manufactured::{manufactured_forcing, ManufacturedSolution};
pub use norms::{broken_norm_1rh, pressure_error, upwind_seminorm, velocity_error, ErrorReport};
pub use regime::{regime_partition, Regime, RegimeReport};
pub use study::{
    convergence_study, run_manufactured, run_test_one, ConvergenceRow, ConvergenceTable, RunResult,
    StudyConfig,
};
