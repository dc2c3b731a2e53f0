//! Scenario orchestration and the studies built on it.

pub mod scenario;
pub mod signal;
pub mod study;

pub use scenario::{cfl_dt, run_scenario, Cut, Domain, Method, ModelSource, RunOutput, Scenario};
pub use signal::{convergence_order, error_norms, ricker, ReceiverLine, Seismogram, SourceSpec};
