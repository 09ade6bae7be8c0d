//! Deterministic discrete-event simulation of computation offloading in
//! mobile edge clouds.
//!
//! Hosts (phones, tablets, a cloudlet, an external job source) generate
//! object-detection jobs, estimate the time and energy of running each job
//! on every worker from periodically exchanged state, and pick an executor
//! with one of several strategies. The simulator accounts for queueing,
//! transfers and per-regime energy and reports energy per job, completion
//! time, deadline hit rate and job flows.
//!
//! ```
//! use offload_sim::config::ScenarioConfig;
//! use offload_sim::metrics::RunMetrics;
//! use offload_sim::strategy::{FallbackPolicy, Strategy};
//!
//! let mut cfg = ScenarioConfig::android_mec(Strategy::Hybrid(FallbackPolicy::Tmin));
//! cfg.duration = 120.0;
//! let result = offload_sim::sim::run(&cfg, 7).unwrap();
//! let m = RunMetrics::from_run(&result, cfg.scenario_id());
//! assert_eq!(m.released, m.completed + m.cancelled);
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimation;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod sim;
pub mod strategy;
pub mod worker;

pub use config::{load_and_validate, ScenarioConfig};
pub use model::{CostEstimate, DeviceProfile, HostId, JobId, JobRecord, JobSpec, Role};
pub use sim::{run, RunResult};
pub use strategy::{FallbackPolicy, Strategy};
