//! Point-to-point transfers between hosts.
//!
//! A transfer from `src` to `dst` is limited by the sender's uplink and the
//! receiver's downlink. In [`ContentionMode::Fixed`] every transfer gets the
//! full `min(up(src), down(dst))` regardless of what else is on the air. In
//! [`ContentionMode::Fair`] each host's uplink and downlink capacity is split
//! evenly among the transfers currently using it, and rates are recomputed
//! whenever a transfer starts or ends.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{HostId, JobId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentionMode {
    #[default]
    Fixed,
    #[serde(alias = "fair-share")]
    Fair,
}

/// Which half of a job's round trip a transfer carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    pub job: JobId,
    pub leg: Leg,
    pub src: HostId,
    pub dst: HostId,
    pub bytes: u64,
    pub started: f64,
    remaining_bits: f64,
    rate: f64,
    updated: f64,
    version: u64,
}

/// A (re)scheduled completion. Older completions for the same job are stale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub job: JobId,
    pub leg: Leg,
    pub at: f64,
    pub version: u64,
}

#[derive(Debug, Clone)]
pub struct Network {
    mode: ContentionMode,
    uplink: Vec<f64>,
    downlink: Vec<f64>,
    active: BTreeMap<JobId, Transfer>,
    next_version: u64,
}

impl Network {
    /// Capacities are in bits per second, indexed by host.
    pub fn new(mode: ContentionMode, uplink: Vec<f64>, downlink: Vec<f64>) -> Self {
        assert_eq!(uplink.len(), downlink.len());
        Self {
            mode,
            uplink,
            downlink,
            active: BTreeMap::new(),
            next_version: 1,
        }
    }

    pub fn mode(&self) -> ContentionMode {
        self.mode
    }

    /// Uncontended rate from `src` to `dst`, bits per second.
    pub fn nominal_rate(&self, src: HostId, dst: HostId) -> f64 {
        self.uplink[src.index()].min(self.downlink[dst.index()])
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn transfer(&self, job: JobId) -> Option<&Transfer> {
        self.active.get(&job)
    }

    /// Starts moving `bytes` for `job` and returns every completion that has
    /// to be (re)scheduled as a result.
    ///
    /// # Panics
    ///
    /// Panics if `job` already has a transfer in flight.
    pub fn start(
        &mut self,
        now: f64,
        job: JobId,
        leg: Leg,
        src: HostId,
        dst: HostId,
        bytes: u64,
    ) -> Vec<Completion> {
        assert!(!self.active.contains_key(&job), "job {job} already transferring");
        self.advance(now);
        let transfer = Transfer {
            job,
            leg,
            src,
            dst,
            bytes,
            started: now,
            remaining_bits: bytes as f64 * 8.0,
            rate: 0.0,
            updated: now,
            version: 0,
        };
        self.active.insert(job, transfer);
        match self.mode {
            ContentionMode::Fixed => {
                let rate = self.nominal_rate(src, dst);
                vec![self.reschedule(job, rate, now)]
            }
            ContentionMode::Fair => self.rebalance(now),
        }
    }

    /// Completes the transfer of `job` if `version` is current. Returns the
    /// finished transfer and any completions that moved because capacity was
    /// freed, or `None` for a stale completion.
    pub fn finish(&mut self, now: f64, job: JobId, version: u64) -> Option<(Transfer, Vec<Completion>)> {
        match self.active.get(&job) {
            Some(t) if t.version == version => {}
            _ => return None,
        }
        self.advance(now);
        let done = self.active.remove(&job).expect("checked above");
        let moved = match self.mode {
            ContentionMode::Fixed => Vec::new(),
            ContentionMode::Fair => self.rebalance(now),
        };
        Some((done, moved))
    }

    fn advance(&mut self, now: f64) {
        for t in self.active.values_mut() {
            t.remaining_bits = (t.remaining_bits - t.rate * (now - t.updated)).max(0.0);
            t.updated = now;
        }
    }

    fn reschedule(&mut self, job: JobId, rate: f64, now: f64) -> Completion {
        let version = self.next_version;
        self.next_version += 1;
        let t = self.active.get_mut(&job).expect("active transfer");
        t.rate = rate;
        t.version = version;
        Completion {
            job,
            leg: t.leg,
            at: now + t.remaining_bits / rate,
            version,
        }
    }

    fn rebalance(&mut self, now: f64) -> Vec<Completion> {
        let n = self.uplink.len();
        let mut senders = vec![0usize; n];
        let mut receivers = vec![0usize; n];
        for t in self.active.values() {
            senders[t.src.index()] += 1;
            receivers[t.dst.index()] += 1;
        }
        let updates: Vec<(JobId, f64)> = self
            .active
            .values()
            .filter_map(|t| {
                let rate = (self.uplink[t.src.index()] / senders[t.src.index()] as f64)
                    .min(self.downlink[t.dst.index()] / receivers[t.dst.index()] as f64);
                (rate != t.rate).then_some((t.job, rate))
            })
            .collect();
        updates
            .into_iter()
            .map(|(job, rate)| self.reschedule(job, rate, now))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: u64 = 2_200_000;

    fn net(mode: ContentionMode) -> Network {
        // host 0: 110 up / 110 down, host 1: 210 / 110, host 2: 941 / 946 (Mbit/s)
        Network::new(mode, vec![110e6, 210e6, 941e6], vec![110e6, 110e6, 946e6])
    }

    #[test]
    fn fixed_rate_uses_the_slower_side() {
        let mut n = net(ContentionMode::Fixed);
        let c = n.start(0.0, 1, Leg::Input, HostId(1), HostId(0), MB);
        assert_eq!(c.len(), 1);
        assert!((c[0].at - 0.16).abs() < 1e-12);
        let c2 = n.start(0.0, 2, Leg::Input, HostId(1), HostId(2), MB);
        assert!((c2[0].at - MB as f64 * 8.0 / 210e6).abs() < 1e-12);
        let (done, moved) = n.finish(0.16, 1, c[0].version).unwrap();
        assert_eq!(done.job, 1);
        assert!(moved.is_empty());
    }

    #[test]
    fn fair_share_halves_and_restores() {
        let mut n = net(ContentionMode::Fair);
        let a = n.start(0.0, 1, Leg::Input, HostId(2), HostId(0), MB);
        assert!((a[0].at - 0.16).abs() < 1e-12);
        // second download into host 0 halves both rates
        let b = n.start(0.08, 2, Leg::Input, HostId(2), HostId(0), MB);
        assert_eq!(b.len(), 2);
        let first = b.iter().find(|c| c.job == 1).unwrap();
        // half the bits remain, now at half rate
        assert!((first.at - 0.24).abs() < 1e-12);
        assert!(n.finish(0.16, 1, a[0].version).is_none(), "stale completion must be ignored");
        let (_, moved) = n.finish(first.at, 1, first.version).unwrap();
        assert_eq!(moved.len(), 1);
        // job 2 moved 0.16 s * 55 Mbit/s = 8.8 Mbit of 17.6, rest at full rate
        assert!((moved[0].at - 0.32).abs() < 1e-12);
    }
}
