//! FIFO, non-preemptive, one-job-at-a-time executor.

use std::collections::VecDeque;

use crate::estimation::{JobEvent, JobEventKind};
use crate::model::JobId;

#[derive(Debug, Clone, Default)]
pub struct WorkerQueue {
    running: Option<(JobId, f64)>,
    pending: VecDeque<JobId>,
}

impl WorkerQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Jobs held, the running one included.
    pub fn len(&self) -> usize {
        self.pending.len() + usize::from(self.running.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_idle(&self) -> bool {
        self.running.is_none()
    }

    pub fn running(&self) -> Option<JobId> {
        self.running.map(|(job, _)| job)
    }

    pub fn running_since(&self) -> Option<f64> {
        self.running.map(|(_, start)| start)
    }

    pub fn pending(&self) -> impl Iterator<Item = JobId> + '_ {
        self.pending.iter().copied()
    }

    /// Appends `job`; an idle worker starts it at once.
    pub fn enqueue(&mut self, job: JobId, now: f64) -> Vec<JobEvent> {
        let mut events = vec![JobEvent {
            kind: JobEventKind::Queued,
            job,
            time: now,
        }];
        self.pending.push_back(job);
        if self.running.is_none() {
            events.extend(self.start_next(now));
        }
        events
    }

    /// Finishes the running job and starts the next pending one, if any.
    ///
    /// # Panics
    ///
    /// Panics if nothing is running.
    pub fn complete_current(&mut self, now: f64) -> Vec<JobEvent> {
        let (job, _) = self
            .running
            .take()
            .expect("complete_current called on an idle worker");
        let mut events = vec![JobEvent {
            kind: JobEventKind::Ended,
            job,
            time: now,
        }];
        events.extend(self.start_next(now));
        events
    }

    fn start_next(&mut self, now: f64) -> Option<JobEvent> {
        let job = self.pending.pop_front()?;
        self.running = Some((job, now));
        Some(JobEvent {
            kind: JobEventKind::Started,
            job,
            time: now,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(events: &[JobEvent]) -> Vec<(JobEventKind, JobId)> {
        events.iter().map(|e| (e.kind, e.job)).collect()
    }

    #[test]
    fn idle_worker_starts_immediately() {
        let mut w = WorkerQueue::new();
        let ev = w.enqueue(1, 0.0);
        assert_eq!(kinds(&ev), vec![(JobEventKind::Queued, 1), (JobEventKind::Started, 1)]);
        assert_eq!(w.len(), 1);
        assert_eq!(w.running(), Some(1));
    }

    #[test]
    fn busy_worker_only_queues() {
        let mut w = WorkerQueue::new();
        w.enqueue(1, 0.0);
        let ev = w.enqueue(2, 0.5);
        assert_eq!(kinds(&ev), vec![(JobEventKind::Queued, 2)]);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn next_job_starts_at_the_same_instant() {
        let mut w = WorkerQueue::new();
        w.enqueue(1, 0.0);
        w.enqueue(2, 0.0);
        let ev = w.complete_current(3.0);
        assert_eq!(kinds(&ev), vec![(JobEventKind::Ended, 1), (JobEventKind::Started, 2)]);
        assert_eq!(ev[1].time, 3.0);
        let ev = w.complete_current(5.0);
        assert_eq!(kinds(&ev), vec![(JobEventKind::Ended, 2)]);
        assert!(w.is_idle());
        assert!(w.is_empty());
    }

    #[test]
    #[should_panic(expected = "idle worker")]
    fn completing_idle_worker_panics() {
        WorkerQueue::new().complete_current(1.0);
    }

    /// Drives a worker with known durations the way the simulator does.
    fn drive(durations: &[f64], t0: f64) -> Vec<(JobId, f64)> {
        let mut w = WorkerQueue::new();
        let mut now = t0;
        let mut ends = Vec::new();
        let mut end_at = None;
        for (i, _) in durations.iter().enumerate() {
            for e in w.enqueue(i as JobId, t0) {
                if e.kind == JobEventKind::Started {
                    end_at = Some(e.time + durations[e.job as usize]);
                }
            }
        }
        while let Some(t) = end_at.take() {
            now = t;
            for e in w.complete_current(now) {
                match e.kind {
                    JobEventKind::Ended => ends.push((e.job, e.time)),
                    JobEventKind::Started => end_at = Some(e.time + durations[e.job as usize]),
                    JobEventKind::Queued => unreachable!(),
                }
            }
        }
        assert!(now >= t0);
        ends
    }

    #[test]
    fn three_two_second_jobs() {
        let ends = drive(&[2.0, 2.0, 2.0], 0.0);
        assert_eq!(ends, vec![(0, 2.0), (1, 4.0), (2, 6.0)]);
    }

    proptest! {
        /// Job i ends at t + d1 + ... + di, in enqueue order.
        #[test]
        fn fifo_prefix_sums(durations in prop::collection::vec(0.01f64..10.0, 1..20), t0 in 0.0f64..100.0) {
            let ends = drive(&durations, t0);
            let mut acc = t0;
            for (i, (job, end)) in ends.iter().enumerate() {
                acc += durations[i];
                prop_assert_eq!(*job, i as JobId);
                prop_assert!((end - acc).abs() <= 1e-9 * acc.max(1.0));
            }
        }

        /// A job's end time does not move when more jobs arrive after it.
        #[test]
        fn later_arrivals_do_not_delay(durations in prop::collection::vec(0.01f64..10.0, 2..12), split in 1usize..11) {
            let split = split.min(durations.len() - 1);
            let all = drive(&durations, 0.0);
            let head = drive(&durations[..split], 0.0);
            for (a, b) in head.iter().zip(&all) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
