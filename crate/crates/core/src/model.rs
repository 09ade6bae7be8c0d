//! Domain types shared by the estimator, the strategies and the simulator.
//!
//! Times are in seconds, sizes in bytes, powers in watts, energies in joules.
//! Reports convert energy to mWh with [`joules_to_mwh`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::estimation::PowerFlags;

/// Joules per milliwatt-hour.
pub const JOULES_PER_MWH: f64 = 3.6;

pub fn joules_to_mwh(joules: f64) -> f64 {
    joules / JOULES_PER_MWH
}

/// Index of a host within a scenario. Lower ids win argmin ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HostId(pub u32);

impl HostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for HostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

impl From<usize> for HostId {
    fn from(i: usize) -> Self {
        HostId(i as u32)
    }
}

pub type JobId = u64;

/// What a host does in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Releases jobs but never executes any.
    Generator,
    /// Executes jobs on behalf of others, never releases any.
    Worker,
    Both,
}

impl Role {
    pub fn generates(self) -> bool {
        matches!(self, Role::Generator | Role::Both)
    }

    pub fn works(self) -> bool {
        matches!(self, Role::Worker | Role::Both)
    }
}

/// A soft real-time job as released by its origin host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub id: JobId,
    pub origin: HostId,
    pub release_time: f64,
    pub relative_deadline: f64,
    pub input_size: u64,
    pub output_size: u64,
}

impl JobSpec {
    pub fn new(
        id: JobId,
        origin: HostId,
        release_time: f64,
        relative_deadline: f64,
        input_size: u64,
        output_size: u64,
    ) -> Result<Self, ModelError> {
        if !(relative_deadline > 0.0) {
            return Err(ModelError::NonPositiveDeadline(relative_deadline));
        }
        if input_size == 0 {
            return Err(ModelError::EmptyInput);
        }
        Ok(Self {
            id,
            origin,
            release_time,
            relative_deadline,
            input_size,
            output_size,
        })
    }

    pub fn absolute_deadline(&self) -> f64 {
        self.release_time + self.relative_deadline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Completed,
    Cancelled,
}

/// Full lifecycle of one job through a simulation run.
///
/// For local jobs `transfer_in_done` equals the decision time and the
/// completion time equals `exec_end`. Cancelled jobs carry no executor and
/// no timestamps past the decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub spec: JobSpec,
    pub executor: Option<HostId>,
    pub decision_time: f64,
    pub transfer_in_done: Option<f64>,
    pub exec_start: Option<f64>,
    pub exec_end: Option<f64>,
    pub completion_time: Option<f64>,
    pub estimate_at_decision: Option<CostEstimate>,
    pub outcome: Outcome,
}

impl JobRecord {
    /// `true` when the job finished no later than `r + d`.
    ///
    /// Only meaningful for completed jobs; asking about a cancelled or
    /// unfinished record is an error.
    pub fn deadline_met(&self) -> Result<bool, ModelError> {
        match (self.outcome, self.completion_time) {
            (Outcome::Completed, Some(t)) => Ok(t <= self.spec.absolute_deadline()),
            _ => Err(ModelError::NotCompleted(self.spec.id)),
        }
    }

    pub fn is_completed(&self) -> bool {
        self.outcome == Outcome::Completed && self.completion_time.is_some()
    }

    pub fn is_local(&self) -> bool {
        self.executor == Some(self.spec.origin)
    }

    /// Release to completion.
    pub fn completion_span(&self) -> Option<f64> {
        self.completion_time.map(|t| t - self.spec.release_time)
    }

    /// Checks `release <= decision <= transfer_in_done <= exec_start <=
    /// exec_end <= completion`, skipping absent stamps.
    pub fn lifecycle_is_monotone(&self) -> bool {
        let stamps = [
            Some(self.spec.release_time),
            Some(self.decision_time),
            self.transfer_in_done,
            self.exec_start,
            self.exec_end,
            self.completion_time,
        ];
        let present: Vec<f64> = stamps.iter().flatten().copied().collect();
        present.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Ground-truth characteristics of a device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub p_idle: f64,
    pub p_compute: f64,
    pub p_upload: f64,
    pub p_download: f64,
    /// Mean effective execution time of one job.
    pub exec_time_mean: f64,
    /// Per-job execution time is drawn uniformly from `mean * (1 ± jitter)`.
    pub exec_time_jitter: f64,
    /// Bits per second.
    pub uplink_bw: f64,
    /// Bits per second.
    pub downlink_bw: f64,
    pub role: Role,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidProfile {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        let powers = [self.p_idle, self.p_compute, self.p_upload, self.p_download];
        if powers.iter().any(|p| !(*p > 0.0)) {
            return Err(bad("all power draws must be positive"));
        }
        if self.p_compute < self.p_idle {
            return Err(bad("compute power must not be below idle power"));
        }
        if !(self.uplink_bw > 0.0 && self.downlink_bw > 0.0) {
            return Err(bad("bandwidths must be positive"));
        }
        if !(self.exec_time_mean > 0.0) {
            return Err(bad("mean execution time must be positive"));
        }
        if !(0.0..1.0).contains(&self.exec_time_jitter) {
            return Err(bad("execution time jitter must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Instantaneous draw for a set of concurrent activities.
    ///
    /// A single activity draws its own measured power. Concurrent activities
    /// each add their excess over idle on top of the idle draw.
    pub fn power(&self, flags: PowerFlags) -> f64 {
        let mut watts = self.p_idle;
        if flags.computing {
            watts += self.p_compute - self.p_idle;
        }
        if flags.uploading {
            watts += self.p_upload - self.p_idle;
        }
        if flags.downloading {
            watts += self.p_download - self.p_idle;
        }
        watts
    }

    /// Compute energy of one job of mean length, in joules.
    pub fn compute_energy_per_job(&self) -> f64 {
        self.exec_time_mean * self.p_compute
    }
}

/// State of one host as published to its peers.
///
/// Every estimate is `None` until the owning profiler has either a sample
/// or a seed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostSnapshot {
    pub host: HostId,
    /// Jobs held by the worker, the running one included.
    pub queue_length: usize,
    pub te_avg: Option<f64>,
    pub pc_avg: Option<f64>,
    pub pu_avg: Option<f64>,
    pub pd_avg: Option<f64>,
    /// Start of the running job, if any.
    pub running_since: Option<f64>,
    pub snapshot_time: f64,
}

/// Transfer cost between an origin and a peer, in seconds per byte.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkEstimate {
    pub from: HostId,
    pub to: HostId,
    /// Origin to peer (job inputs).
    pub ul_time_per_byte: f64,
    /// Peer to origin (job outputs).
    pub dl_time_per_byte: f64,
}

impl LinkEstimate {
    /// Link estimate for rates given in bits per second.
    pub fn from_rates(from: HostId, to: HostId, ul_bps: f64, dl_bps: f64) -> Self {
        Self {
            from,
            to,
            ul_time_per_byte: 8.0 / ul_bps,
            dl_time_per_byte: 8.0 / dl_bps,
        }
    }
}

/// Estimated time and energy of running one job on one candidate host.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub t_in: f64,
    pub t_compute: f64,
    pub t_out: f64,
    pub e_in: f64,
    pub e_compute: f64,
    pub e_out: f64,
}

impl CostEstimate {
    pub fn total_time(&self) -> f64 {
        self.t_in + self.t_compute + self.t_out
    }

    pub fn total_energy(&self) -> f64 {
        self.e_in + self.e_compute + self.e_out
    }
}
