use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::model::{HostId, JobId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    JobRelease,
    TransferInDone,
    ExecEnd,
    TransferOutDone,
    DisseminationTick,
    SimEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    /// Insertion counter; breaks ties between equal times.
    pub seq: u64,
    pub kind: EventKind,
    pub host: Option<HostId>,
    pub job: Option<JobId>,
    /// Transfer completions carry the version they were scheduled under and
    /// are dropped if the transfer has been rescheduled since.
    pub(crate) version: u64,
}

#[derive(Debug)]
struct Queued(Event);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap pops the maximum
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Min-queue of events ordered by `(time, seq)`.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Queued>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind, host: Option<HostId>, job: Option<JobId>) -> u64 {
        self.push_versioned(time, kind, host, job, 0)
    }

    pub(crate) fn push_versioned(
        &mut self,
        time: f64,
        kind: EventKind,
        host: Option<HostId>,
        job: Option<JobId>,
        version: u64,
    ) -> u64 {
        assert!(time.is_finite(), "event scheduled at non-finite time {time}");
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Queued(Event {
            time,
            seq,
            kind,
            host,
            job,
            version,
        }));
        seq
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|q| q.0)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|q| q.0.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
