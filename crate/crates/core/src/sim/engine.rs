use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::energy::EnergyLedger;
use super::event::{Event, EventKind, EventQueue};
use super::network::{Completion, Leg, Network};
use super::workload::generate_workload;
use crate::config::ScenarioConfig;
use crate::error::WorkloadError;
use crate::estimation::{
    full_estimate, Direction, EstimateOptions, JobEvent, JobEventKind, Profiler, ProfilerSeeds, View,
};
use crate::model::{DeviceProfile, HostId, HostSnapshot, JobId, JobRecord, JobSpec, Outcome, Role};
use crate::seed::{derive_seed, STREAM_DECISION, STREAM_JITTER};
use crate::strategy::{decide, Candidate};
use crate::worker::WorkerQueue;

/// One processed event, as written to the NDJSON trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: EventKind,
    pub host: Option<HostId>,
    pub job: Option<JobId>,
}

/// Everything one simulated run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: String,
    pub strategy: String,
    pub lambda: f64,
    pub deadline: f64,
    pub seed: u64,
    pub host_names: Vec<String>,
    pub roles: Vec<Role>,
    /// Indexed by job id.
    pub records: Vec<JobRecord>,
    pub ledger: EnergyLedger,
    /// Empty unless tracing was enabled.
    pub trace: Vec<TraceRecord>,
    pub duration: f64,
    /// Time of the last event, or `duration` if later.
    pub sim_end: f64,
}

#[derive(Debug)]
struct HostRuntime {
    profile: DeviceProfile,
    role: Role,
    worker: Option<WorkerQueue>,
    profiler: Profiler,
    /// Last snapshot received from every host (indexed by host).
    remote: Vec<Option<HostSnapshot>>,
}

/// A single simulated run, steppable one event at a time.
///
/// Jobs are released at their release time, a decision is taken at the origin
/// from its current view, the input is transferred to the executor, the job
/// waits in the executor's FIFO queue, runs, and the output is transferred
/// back. Local jobs skip both transfers.
#[derive(Debug)]
pub struct Simulation {
    cfg: ScenarioConfig,
    seed: u64,
    now: f64,
    last_event: f64,
    queue: EventQueue,
    hosts: Vec<HostRuntime>,
    workers: Vec<HostId>,
    records: Vec<JobRecord>,
    jitter: Vec<f64>,
    decision_rng: ChaCha8Rng,
    network: Network,
    ledger: EnergyLedger,
    trace: Vec<TraceRecord>,
}

/// Simulates `cfg` with the workload derived from `seed`.
pub fn run(cfg: &ScenarioConfig, seed: u64) -> Result<RunResult, WorkloadError> {
    Ok(Simulation::new(cfg, seed)?.run_to_end())
}

impl Simulation {
    /// Builds a run whose workload is generated from `seed`.
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self, WorkloadError> {
        let jobs = generate_workload(&cfg.generators(), &cfg.workload_params(), seed)?;
        Ok(Self::with_jobs(cfg, seed, jobs))
    }

    /// Builds a run over an explicit job list.
    ///
    /// # Panics
    ///
    /// Panics unless job ids are `0..n` in order, releases are
    /// non-decreasing and non-negative, and every origin is a generator.
    pub fn with_jobs(cfg: &ScenarioConfig, seed: u64, jobs: Vec<JobSpec>) -> Self {
        let n = cfg.hosts.len();
        for (i, j) in jobs.iter().enumerate() {
            assert_eq!(j.id, i as JobId, "job ids must be 0..n in order");
            assert!(j.release_time >= 0.0, "job {i} released before time zero");
            assert!(
                cfg.hosts[j.origin.index()].role.generates(),
                "job {i} originates at non-generator {}",
                j.origin
            );
        }
        assert!(
            jobs.windows(2).all(|w| w[0].release_time <= w[1].release_time),
            "jobs must be ordered by release time"
        );

        let hosts: Vec<HostRuntime> = cfg
            .hosts
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let id = HostId::from(i);
                let p = &h.profile;
                let mut profiler = Profiler::new(id, cfg.ma_window).with_seeds(ProfilerSeeds {
                    te: p.exec_time_mean,
                    pc: p.p_compute,
                    pu: p.p_upload,
                    pd: p.p_download,
                });
                if h.role.generates() {
                    for (k, peer) in cfg.hosts.iter().enumerate() {
                        if k == i || !peer.role.works() {
                            continue;
                        }
                        let up = p.uplink_bw.min(peer.profile.downlink_bw);
                        let down = peer.profile.uplink_bw.min(p.downlink_bw);
                        profiler.seed_link(HostId::from(k), 8.0 / up, 8.0 / down);
                    }
                }
                HostRuntime {
                    profile: p.clone(),
                    role: h.role,
                    worker: h.role.works().then(WorkerQueue::new),
                    profiler,
                    remote: vec![None; n],
                }
            })
            .collect();

        let mut jitter_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_JITTER, 0));
        let jitter: Vec<f64> = jobs.iter().map(|_| jitter_rng.random_range(-1.0..1.0)).collect();

        let mut queue = EventQueue::new();
        if cfg.dissemination_period > 0.0 {
            queue.push_versioned(0.0, EventKind::DisseminationTick, None, None, 0);
        }
        for j in &jobs {
            queue.push(j.release_time, EventKind::JobRelease, Some(j.origin), Some(j.id));
        }
        queue.push(cfg.duration, EventKind::SimEnd, None, None);

        let records = jobs
            .into_iter()
            .map(|spec| JobRecord {
                decision_time: spec.release_time,
                spec,
                executor: None,
                transfer_in_done: None,
                exec_start: None,
                exec_end: None,
                completion_time: None,
                estimate_at_decision: None,
                outcome: Outcome::Cancelled,
            })
            .collect();

        Self {
            seed,
            now: 0.0,
            last_event: 0.0,
            queue,
            workers: cfg.workers(),
            network: Network::new(
                cfg.contention,
                cfg.hosts.iter().map(|h| h.profile.uplink_bw).collect(),
                cfg.hosts.iter().map(|h| h.profile.downlink_bw).collect(),
            ),
            ledger: EnergyLedger::new(cfg.hosts.iter().map(|h| &h.profile)),
            hosts,
            records,
            jitter,
            decision_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_DECISION, 0)),
            trace: Vec::new(),
            cfg: cfg.clone(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn records(&self) -> &[JobRecord] {
        &self.records
    }

    /// Time of the next pending event.
    pub fn next_event_time(&self) -> Option<f64> {
        self.queue.peek_time()
    }

    /// Jobs currently held by `host`'s worker, running one included.
    pub fn queue_length(&self, host: HostId) -> usize {
        self.hosts[host.index()].worker.as_ref().map_or(0, WorkerQueue::len)
    }

    /// What `observer` currently believes about `target`.
    pub fn known_snapshot(&self, observer: HostId, target: HostId) -> Option<HostSnapshot> {
        if observer == target || self.oracle() {
            return Some(self.hosts[target.index()].profiler.snapshot(self.now));
        }
        self.hosts[observer.index()].remote[target.index()].clone()
    }

    fn oracle(&self) -> bool {
        self.cfg.dissemination_period == 0.0
    }

    /// The view `origin` decides from: its own live state, the last received
    /// snapshot of every other host and its own link estimates.
    pub fn view(&self, origin: HostId) -> View {
        let mut view = View::new(origin);
        for i in 0..self.hosts.len() {
            if let Some(s) = self.known_snapshot(origin, HostId::from(i)) {
                view = view.with_snapshot(s);
            }
        }
        for link in self.hosts[origin.index()].profiler.link_estimates() {
            view = view.with_link(link);
        }
        view
    }

    /// Copies every host's current snapshot into every other host's view.
    pub fn disseminate(&mut self) {
        let now = self.now;
        let snaps: Vec<HostSnapshot> = self.hosts.iter().map(|h| h.profiler.snapshot(now)).collect();
        for (i, h) in self.hosts.iter_mut().enumerate() {
            for (k, s) in snaps.iter().enumerate() {
                if k != i {
                    h.remote[k] = Some(s.clone());
                }
            }
        }
        for i in 0..self.hosts.len() {
            self.sample_power(HostId::from(i));
        }
    }

    /// Processes the next event. Returns `None` once the queue is empty.
    pub fn step(&mut self) -> Option<Event> {
        loop {
            let ev = self.queue.pop()?;
            assert!(ev.time >= self.now, "event at {} is before now {}", ev.time, self.now);
            self.now = ev.time;
            let processed = match ev.kind {
                EventKind::JobRelease => {
                    self.on_release(ev.job.expect("release carries a job"));
                    true
                }
                EventKind::TransferInDone | EventKind::TransferOutDone => {
                    self.on_transfer_done(ev.job.expect("transfer carries a job"), ev.version)
                }
                EventKind::ExecEnd => {
                    self.on_exec_end(ev.host.expect("exec end carries a host"), ev.job.expect("and a job"));
                    true
                }
                EventKind::DisseminationTick => {
                    self.disseminate();
                    let next = (ev.version + 1) as f64 * self.cfg.dissemination_period;
                    if next < self.cfg.duration {
                        self.queue
                            .push_versioned(next, EventKind::DisseminationTick, None, None, ev.version + 1);
                    }
                    true
                }
                EventKind::SimEnd => true,
            };
            if processed {
                self.last_event = ev.time;
                if self.cfg.trace {
                    self.trace.push(TraceRecord {
                        time: ev.time,
                        kind: ev.kind,
                        host: ev.host,
                        job: ev.job,
                    });
                }
                return Some(ev);
            }
        }
    }

    /// Processes every event at or before `t`.
    pub fn run_until(&mut self, t: f64) {
        while self.queue.peek_time().is_some_and(|next| next <= t) {
            self.step();
        }
    }

    /// Drains the queue and closes the energy ledger.
    pub fn run_to_end(mut self) -> RunResult {
        while self.step().is_some() {}
        let sim_end = self.last_event.max(self.cfg.duration);
        self.ledger.close(sim_end);
        debug_assert!(self.records.iter().all(|r| r.outcome == Outcome::Cancelled || r.is_completed()));
        RunResult {
            scenario: self.cfg.name.clone(),
            strategy: self.cfg.strategy.name(),
            lambda: self.cfg.lambda,
            deadline: self.cfg.deadline,
            seed: self.seed,
            host_names: self.cfg.hosts.iter().map(|h| h.name.clone()).collect(),
            roles: self.hosts.iter().map(|h| h.role).collect(),
            records: self.records,
            ledger: self.ledger,
            trace: self.trace,
            duration: self.cfg.duration,
            sim_end,
        }
    }

    fn on_release(&mut self, job: JobId) {
        let spec = self.records[job as usize].spec.clone();
        let origin = spec.origin;
        let view = self.view(origin);
        let opts = EstimateOptions {
            corrected_tc: self.cfg.corrected_tc,
            now: self.now,
        };
        let candidates: Vec<Candidate> = self
            .workers
            .iter()
            .filter_map(|&h| match full_estimate(&spec, h, &view, opts) {
                Ok(estimate) => Some(Candidate { host: h, estimate }),
                Err(e) => {
                    log::debug!("job {job}: skipping host {h}: {e}");
                    None
                }
            })
            .collect();
        let decision = decide(&self.cfg.strategy, &spec, &candidates, &mut self.decision_rng);

        let rec = &mut self.records[job as usize];
        rec.decision_time = self.now;
        rec.estimate_at_decision = decision.estimate;
        rec.executor = decision.executor;
        match decision.executor {
            None => rec.outcome = Outcome::Cancelled,
            Some(h) if h == origin => {
                rec.transfer_in_done = Some(self.now);
                self.enqueue(h, job);
            }
            Some(h) => self.start_transfer(job, Leg::Input, origin, h, spec.input_size),
        }
    }

    fn enqueue(&mut self, host: HostId, job: JobId) {
        let now = self.now;
        let events = self.hosts[host.index()]
            .worker
            .as_mut()
            .expect("executor is a worker")
            .enqueue(job, now);
        self.apply_job_events(host, &events);
    }

    fn on_exec_end(&mut self, host: HostId, job: JobId) {
        let now = self.now;
        let worker = self.hosts[host.index()].worker.as_mut().expect("executor is a worker");
        assert_eq!(worker.running(), Some(job), "exec end for a job that is not running");
        let events = worker.complete_current(now);
        self.apply_job_events(host, &events);
        let spec = &self.records[job as usize].spec;
        let (origin, out) = (spec.origin, spec.output_size);
        if origin == host {
            self.complete(job);
        } else {
            self.start_transfer(job, Leg::Output, host, origin, out);
        }
    }

    fn apply_job_events(&mut self, host: HostId, events: &[JobEvent]) {
        for e in events {
            self.hosts[host.index()].profiler.on_job_event(e);
            let rec = &mut self.records[e.job as usize];
            match e.kind {
                JobEventKind::Queued => {}
                JobEventKind::Started => {
                    rec.exec_start = Some(e.time);
                    let p = &self.hosts[host.index()].profile;
                    let length = p.exec_time_mean * (1.0 + p.exec_time_jitter * self.jitter[e.job as usize]);
                    self.queue
                        .push(e.time + length, EventKind::ExecEnd, Some(host), Some(e.job));
                }
                JobEventKind::Ended => rec.exec_end = Some(e.time),
            }
        }
        self.sample_power(host);
    }

    fn start_transfer(&mut self, job: JobId, leg: Leg, src: HostId, dst: HostId, bytes: u64) {
        self.hosts[src.index()].profiler.on_transfer_start(Direction::Upload);
        self.hosts[dst.index()].profiler.on_transfer_start(Direction::Download);
        let scheduled = self.network.start(self.now, job, leg, src, dst, bytes);
        self.schedule_completions(&scheduled);
        self.sample_power(src);
        self.sample_power(dst);
    }

    fn schedule_completions(&mut self, completions: &[Completion]) {
        for c in completions {
            let t = self.network.transfer(c.job).expect("scheduled transfer is active");
            let (kind, host) = match c.leg {
                Leg::Input => (EventKind::TransferInDone, t.dst),
                Leg::Output => (EventKind::TransferOutDone, t.dst),
            };
            self.queue.push_versioned(c.at, kind, Some(host), Some(c.job), c.version);
        }
    }

    /// Returns whether the event was current.
    fn on_transfer_done(&mut self, job: JobId, version: u64) -> bool {
        let Some((t, moved)) = self.network.finish(self.now, job, version) else {
            return false;
        };
        self.schedule_completions(&moved);
        self.hosts[t.src.index()].profiler.on_transfer_end(Direction::Upload);
        self.hosts[t.dst.index()].profiler.on_transfer_end(Direction::Download);
        let elapsed = self.now - t.started;
        match t.leg {
            Leg::Input => {
                self.hosts[t.src.index()]
                    .profiler
                    .observe_transfer(t.dst, Direction::Upload, t.bytes, elapsed);
            }
            Leg::Output => {
                self.hosts[t.dst.index()]
                    .profiler
                    .observe_transfer(t.src, Direction::Download, t.bytes, elapsed);
            }
        }
        self.sample_power(t.src);
        self.sample_power(t.dst);
        match t.leg {
            Leg::Input => {
                self.records[job as usize].transfer_in_done = Some(self.now);
                self.enqueue(t.dst, job);
            }
            Leg::Output => self.complete(job),
        }
        true
    }

    fn complete(&mut self, job: JobId) {
        let rec = &mut self.records[job as usize];
        rec.completion_time = Some(self.now);
        rec.outcome = Outcome::Completed;
    }

    /// Updates the ledger and feeds the host's profiler one power reading.
    fn sample_power(&mut self, host: HostId) {
        let h = &mut self.hosts[host.index()];
        let flags = h.profiler.flags();
        self.ledger.set_flags(host, self.now, flags);
        let watts = h.profile.power(flags);
        h.profiler.on_power_sample(watts, flags);
    }
}
