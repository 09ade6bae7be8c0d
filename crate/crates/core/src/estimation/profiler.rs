use std::collections::BTreeMap;

use super::{MovingAverage, PowerFlags};
use crate::model::{HostId, HostSnapshot, JobId, LinkEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobEventKind {
    Queued,
    Started,
    Ended,
}

/// Worker notification about one job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobEvent {
    pub kind: JobEventKind,
    pub job: JobId,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upload,
    Download,
}

/// Fallback values used until the first real sample arrives, standing in
/// for a calibration run before the host joins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilerSeeds {
    pub te: f64,
    pub pc: f64,
    pub pu: f64,
    pub pd: f64,
}

#[derive(Debug, Clone)]
struct LinkTracker {
    ul: MovingAverage,
    dl: MovingAverage,
}

/// State estimator for one host.
///
/// Tracks the local job state (queue length, execution time), the energy
/// state (compute, upload and download power) and per-peer transfer costs.
/// Only the job and energy state is published in snapshots; link estimates
/// stay with their owner.
#[derive(Debug, Clone)]
pub struct Profiler {
    host: HostId,
    window: usize,
    queue_length: usize,
    running: Option<(JobId, f64)>,
    te: MovingAverage,
    pc: MovingAverage,
    pu: MovingAverage,
    pd: MovingAverage,
    seeds: Option<ProfilerSeeds>,
    uploads: usize,
    downloads: usize,
    links: BTreeMap<HostId, LinkTracker>,
}

impl Profiler {
    pub fn new(host: HostId, window: usize) -> Self {
        Self {
            host,
            window,
            queue_length: 0,
            running: None,
            te: MovingAverage::new(window),
            pc: MovingAverage::new(window),
            pu: MovingAverage::new(window),
            pd: MovingAverage::new(window),
            seeds: None,
            uploads: 0,
            downloads: 0,
            links: BTreeMap::new(),
        }
    }

    pub fn with_seeds(mut self, seeds: ProfilerSeeds) -> Self {
        self.seeds = Some(seeds);
        self
    }

    /// Registers a peer with an initial probe measurement (seconds per byte
    /// each way). Later observed transfers are averaged in with equal weight.
    pub fn seed_link(&mut self, peer: HostId, ul_time_per_byte: f64, dl_time_per_byte: f64) {
        let mut tracker = LinkTracker {
            ul: MovingAverage::new(self.window),
            dl: MovingAverage::new(self.window),
        };
        tracker.ul.push(ul_time_per_byte);
        tracker.dl.push(dl_time_per_byte);
        self.links.insert(peer, tracker);
    }

    pub fn host(&self) -> HostId {
        self.host
    }

    pub fn queue_length(&self) -> usize {
        self.queue_length
    }

    /// # Panics
    ///
    /// Panics on an event sequence no FIFO worker can produce (a start while
    /// another job runs, an end for a job that is not running).
    pub fn on_job_event(&mut self, event: &JobEvent) {
        match event.kind {
            JobEventKind::Queued => self.queue_length += 1,
            JobEventKind::Started => {
                assert!(
                    self.running.is_none(),
                    "host {}: job {} started while job {:?} runs",
                    self.host,
                    event.job,
                    self.running
                );
                assert!(self.queue_length > 0, "host {}: started job {} was never queued", self.host, event.job);
                self.running = Some((event.job, event.time));
            }
            JobEventKind::Ended => {
                let (job, start) = self.running.take().unwrap_or_else(|| {
                    panic!("host {}: job {} ended but nothing runs", self.host, event.job)
                });
                assert_eq!(job, event.job, "host {}: end event for a job that is not running", self.host);
                self.te.push(event.time - start);
                self.queue_length -= 1;
            }
        }
    }

    pub fn on_transfer_start(&mut self, direction: Direction) {
        match direction {
            Direction::Upload => self.uploads += 1,
            Direction::Download => self.downloads += 1,
        }
    }

    pub fn on_transfer_end(&mut self, direction: Direction) {
        let counter = match direction {
            Direction::Upload => &mut self.uploads,
            Direction::Download => &mut self.downloads,
        };
        assert!(*counter > 0, "host {}: unmatched transfer end", self.host);
        *counter -= 1;
    }

    /// Records an observed transfer with `peer`. Uploads refine the input
    /// cost, downloads the output cost.
    pub fn observe_transfer(&mut self, peer: HostId, direction: Direction, bytes: u64, seconds: f64) {
        if bytes == 0 {
            return;
        }
        let per_byte = seconds / bytes as f64;
        if let Some(tracker) = self.links.get_mut(&peer) {
            match direction {
                Direction::Upload => tracker.ul.push(per_byte),
                Direction::Download => tracker.dl.push(per_byte),
            }
        }
    }

    pub fn flags(&self) -> PowerFlags {
        PowerFlags {
            computing: self.running.is_some(),
            uploading: self.uploads > 0,
            downloading: self.downloads > 0,
        }
    }

    /// Feeds one power reading. It is attributed to the compute, upload or
    /// download estimate only when exactly one flag is set; otherwise it is
    /// dropped. Returns whether the sample was kept.
    pub fn on_power_sample(&mut self, watts: f64, flags: PowerFlags) -> bool {
        if flags.active_count() != 1 {
            return false;
        }
        if flags.computing {
            self.pc.push(watts);
        } else if flags.uploading {
            self.pu.push(watts);
        } else {
            self.pd.push(watts);
        }
        true
    }

    pub fn te_estimate(&self) -> Option<f64> {
        self.te.value().or(self.seeds.map(|s| s.te))
    }

    pub fn pc_estimate(&self) -> Option<f64> {
        self.pc.value().or(self.seeds.map(|s| s.pc))
    }

    pub fn pu_estimate(&self) -> Option<f64> {
        self.pu.value().or(self.seeds.map(|s| s.pu))
    }

    pub fn pd_estimate(&self) -> Option<f64> {
        self.pd.value().or(self.seeds.map(|s| s.pd))
    }

    /// Number of execution-time samples observed so far.
    pub fn te_samples(&self) -> usize {
        self.te.len()
    }

    pub fn snapshot(&self, now: f64) -> HostSnapshot {
        HostSnapshot {
            host: self.host,
            queue_length: self.queue_length,
            te_avg: self.te_estimate(),
            pc_avg: self.pc_estimate(),
            pu_avg: self.pu_estimate(),
            pd_avg: self.pd_estimate(),
            running_since: self.running.map(|(_, start)| start),
            snapshot_time: now,
        }
    }

    pub fn link_estimate(&self, peer: HostId) -> Option<LinkEstimate> {
        let tracker = self.links.get(&peer)?;
        Some(LinkEstimate {
            from: self.host,
            to: peer,
            ul_time_per_byte: tracker.ul.value()?,
            dl_time_per_byte: tracker.dl.value()?,
        })
    }

    pub fn link_estimates(&self) -> impl Iterator<Item = LinkEstimate> + '_ {
        self.links.keys().filter_map(|&peer| self.link_estimate(peer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: JobEventKind, job: JobId, time: f64) -> JobEvent {
        JobEvent { kind, job, time }
    }

    #[test]
    fn execution_time_sample_from_start_and_end() {
        let mut p = Profiler::new(HostId(0), 10);
        p.on_job_event(&ev(JobEventKind::Queued, 1, 10.0));
        p.on_job_event(&ev(JobEventKind::Started, 1, 10.0));
        assert!(p.flags().computing);
        p.on_job_event(&ev(JobEventKind::Ended, 1, 14.0));
        assert_eq!(p.te_estimate(), Some(4.0));
        assert!(!p.flags().computing);
        assert_eq!(p.queue_length(), 0);
    }

    #[test]
    fn back_to_back_jobs_average() {
        let mut p = Profiler::new(HostId(0), 2);
        p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Queued, 2, 0.0));
        p.on_job_event(&ev(JobEventKind::Started, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Ended, 1, 4.0));
        p.on_job_event(&ev(JobEventKind::Started, 2, 4.0));
        p.on_job_event(&ev(JobEventKind::Ended, 2, 10.0));
        assert_eq!(p.te_estimate(), Some(5.0));
    }

    #[test]
    fn starting_does_not_change_queue_length() {
        let mut p = Profiler::new(HostId(0), 10);
        p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
        assert_eq!(p.queue_length(), 1);
        p.on_job_event(&ev(JobEventKind::Started, 1, 0.0));
        assert_eq!(p.queue_length(), 1);
        assert_eq!(p.snapshot(0.5).running_since, Some(0.0));
    }

    #[test]
    #[should_panic(expected = "nothing runs")]
    fn end_without_start_panics() {
        let mut p = Profiler::new(HostId(0), 10);
        p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Ended, 1, 1.0));
    }

    #[test]
    #[should_panic(expected = "not running")]
    fn end_for_wrong_job_panics() {
        let mut p = Profiler::new(HostId(0), 10);
        p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Started, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Ended, 2, 1.0));
    }

    #[test]
    fn power_samples_need_exactly_one_flag() {
        let mut p = Profiler::new(HostId(0), 10);
        let computing = PowerFlags {
            computing: true,
            ..PowerFlags::IDLE
        };
        assert!(p.on_power_sample(4.5, computing));
        assert_eq!(p.pc_estimate(), Some(4.5));

        let busy = PowerFlags {
            computing: true,
            uploading: true,
            downloading: false,
        };
        assert!(!p.on_power_sample(6.0, busy));
        assert_eq!(p.pc_estimate(), Some(4.5));
        assert_eq!(p.pu_estimate(), None);

        assert!(!p.on_power_sample(0.9, PowerFlags::IDLE));
        assert_eq!((p.pu_estimate(), p.pd_estimate()), (None, None));

        let up = PowerFlags {
            uploading: true,
            ..PowerFlags::IDLE
        };
        let down = PowerFlags {
            downloading: true,
            ..PowerFlags::IDLE
        };
        p.on_power_sample(2.0, up);
        p.on_power_sample(1.5, down);
        assert_eq!((p.pu_estimate(), p.pd_estimate()), (Some(2.0), Some(1.5)));
    }

    #[test]
    fn seeds_fill_in_until_first_sample() {
        let mut p = Profiler::new(HostId(3), 10).with_seeds(ProfilerSeeds {
            te: 4.0,
            pc: 4.5,
            pu: 3.0,
            pd: 2.1,
        });
        let s = p.snapshot(1.0);
        assert_eq!(s.te_avg, Some(4.0));
        assert_eq!(s.pc_avg, Some(4.5));
        p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Started, 1, 0.0));
        p.on_job_event(&ev(JobEventKind::Ended, 1, 3.0));
        assert_eq!(p.te_estimate(), Some(3.0));
    }

    #[test]
    fn observed_transfers_refine_links() {
        let mut p = Profiler::new(HostId(0), 10);
        p.seed_link(HostId(1), 1e-7, 2e-7);
        assert_eq!(p.link_estimate(HostId(2)), None);
        p.observe_transfer(HostId(1), Direction::Upload, 1000, 3e-4);
        let link = p.link_estimate(HostId(1)).unwrap();
        assert!((link.ul_time_per_byte - 2e-7).abs() < 1e-20);
        assert_eq!(link.dl_time_per_byte, 2e-7);
    }

    #[test]
    fn transfer_flags_count_overlapping_transfers() {
        let mut p = Profiler::new(HostId(0), 10);
        p.on_transfer_start(Direction::Upload);
        p.on_transfer_start(Direction::Upload);
        p.on_transfer_end(Direction::Upload);
        assert!(p.flags().uploading);
        p.on_transfer_end(Direction::Upload);
        assert!(p.flags().is_idle());
    }
}
