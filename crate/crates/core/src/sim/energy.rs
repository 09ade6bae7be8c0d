//! Per-host energy accounting by activity regime.

use serde::{Deserialize, Serialize};

use crate::estimation::PowerFlags;
use crate::model::{DeviceProfile, HostId};

/// Joules attributed to each regime.
///
/// An interval with a single activity charges that activity's power to it.
/// Overlapping activities split the idle base evenly and each keeps its own
/// excess over idle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeJoules {
    pub idle: f64,
    pub compute: f64,
    pub upload: f64,
    pub download: f64,
}

impl RegimeJoules {
    pub fn total(&self) -> f64 {
        self.idle + self.compute + self.upload + self.download
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub start: f64,
    pub end: f64,
    pub flags: PowerFlags,
}

impl RegimeInterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
struct HostEnergy {
    profile: DeviceProfile,
    flags: PowerFlags,
    since: f64,
    intervals: Vec<RegimeInterval>,
    joules: RegimeJoules,
}

impl HostEnergy {
    fn close_interval(&mut self, now: f64) {
        let len = now - self.since;
        if len <= 0.0 {
            self.since = now;
            return;
        }
        let p = &self.profile;
        let f = self.flags;
        if f.is_idle() {
            self.joules.idle += p.p_idle * len;
        } else {
            let base = p.p_idle * len / f.active_count() as f64;
            if f.computing {
                self.joules.compute += base + (p.p_compute - p.p_idle) * len;
            }
            if f.uploading {
                self.joules.upload += base + (p.p_upload - p.p_idle) * len;
            }
            if f.downloading {
                self.joules.download += base + (p.p_download - p.p_idle) * len;
            }
        }
        self.intervals.push(RegimeInterval {
            start: self.since,
            end: now,
            flags: f,
        });
        self.since = now;
    }
}

/// Energy accrued by every host over `[0, end]`. Intervals of each host tile
/// that span with no gaps.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    hosts: Vec<HostEnergy>,
    closed_at: Option<f64>,
}

impl EnergyLedger {
    /// All hosts start idle at time zero.
    pub fn new<'a>(profiles: impl IntoIterator<Item = &'a DeviceProfile>) -> Self {
        Self {
            hosts: profiles
                .into_iter()
                .map(|p| HostEnergy {
                    profile: p.clone(),
                    flags: PowerFlags::IDLE,
                    since: 0.0,
                    intervals: Vec::new(),
                    joules: RegimeJoules::default(),
                })
                .collect(),
            closed_at: None,
        }
    }

    /// Records that `host` switched to `flags` at `now`. No-op if unchanged.
    pub fn set_flags(&mut self, host: HostId, now: f64, flags: PowerFlags) {
        assert!(self.closed_at.is_none(), "ledger already closed");
        let h = &mut self.hosts[host.index()];
        if h.flags == flags {
            return;
        }
        assert!(now >= h.since, "energy regime change in the past");
        h.close_interval(now);
        h.flags = flags;
    }

    pub fn flags(&self, host: HostId) -> PowerFlags {
        self.hosts[host.index()].flags
    }

    /// Ends accounting for every host at `end`.
    pub fn close(&mut self, end: f64) {
        for h in &mut self.hosts {
            h.close_interval(end);
        }
        self.closed_at = Some(end);
    }

    pub fn closed_at(&self) -> Option<f64> {
        self.closed_at
    }

    pub fn host_count(&self) -> usize {
        self.hosts.len()
    }

    pub fn host_joules(&self, host: HostId) -> RegimeJoules {
        self.hosts[host.index()].joules
    }

    pub fn intervals(&self, host: HostId) -> &[RegimeInterval] {
        &self.hosts[host.index()].intervals
    }

    pub fn total_joules(&self) -> f64 {
        self.hosts.iter().map(|h| h.joules.total()).sum()
    }

    /// Sum of interval lengths for `host`; equals the closed span.
    pub fn covered_time(&self, host: HostId) -> f64 {
        self.intervals(host).iter().map(RegimeInterval::len).sum()
    }

    /// Recomputes each host's energy from its intervals and profile.
    pub fn recomputed_joules(&self, host: HostId) -> f64 {
        let h = &self.hosts[host.index()];
        h.intervals.iter().map(|i| h.profile.power(i.flags) * i.len()).sum()
    }
}
