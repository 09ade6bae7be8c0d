//! Discrete-event simulation of a set of hosts offloading jobs to each other.

mod energy;
mod engine;
mod event;
mod network;
mod workload;

pub use energy::{EnergyLedger, RegimeInterval, RegimeJoules};
pub use engine::{run, RunResult, Simulation, TraceRecord};
pub use event::{Event, EventKind, EventQueue};
pub use network::{Completion, ContentionMode, Leg, Network, Transfer};
pub use workload::{generate_workload, poisson_arrivals, WorkloadParams};
