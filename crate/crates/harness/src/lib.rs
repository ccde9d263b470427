//! Seeded Monte Carlo experiments around the `l3blind` detector: parallel
//! parameter sweeps, frame-concentration and convergence studies, and
//! JSON-lines / CSV / plot-data output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod seeds;
pub mod sweep;
pub mod trial;

pub use config::{Method, SystemConfig};
pub use error::{HarnessError, Result};
pub use sweep::run_sweep;
pub use trial::TrialRecord;
