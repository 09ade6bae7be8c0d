//! Feeding a profiler by hand: job events, power samples and transfers, and
//! the snapshot it publishes.

use offload_sim::estimation::{Direction, JobEvent, JobEventKind, PowerFlags, Profiler, ProfilerSeeds};
use offload_sim::HostId;

fn main() {
    let mut p = Profiler::new(HostId(0), 10).with_seeds(ProfilerSeeds { te: 3.0, pc: 3.2, pu: 2.6, pd: 1.8 });
    println!("seeded: te {:?}", p.te_estimate());

    let ev = |kind, job, time| JobEvent { kind, job, time };
    p.on_job_event(&ev(JobEventKind::Queued, 1, 0.0));
    p.on_job_event(&ev(JobEventKind::Queued, 2, 0.1));
    p.on_job_event(&ev(JobEventKind::Started, 1, 0.2));
    let busy = p.flags();
    println!("queue {} flags {busy:?}", p.queue_length());
    p.on_power_sample(3.4, busy);
    p.on_job_event(&ev(JobEventKind::Ended, 1, 3.0));
    p.on_job_event(&ev(JobEventKind::Started, 2, 3.0));
    p.on_job_event(&ev(JobEventKind::Ended, 2, 5.6));

    // Two regimes at once: the sample cannot be attributed and is dropped.
    p.on_transfer_start(Direction::Upload);
    p.on_job_event(&ev(JobEventKind::Queued, 3, 6.0));
    p.on_job_event(&ev(JobEventKind::Started, 3, 6.0));
    let kept = p.on_power_sample(5.0, p.flags());
    println!("mixed sample kept: {kept}");
    p.on_transfer_end(Direction::Upload);
    p.observe_transfer(HostId(1), Direction::Upload, 2_200_000, 0.2);

    println!("te {:?} pc {:?}", p.te_estimate(), p.pc_estimate());
    println!("snapshot {:?}", p.snapshot(6.5));
    println!("link to h1 {:?}", p.link_estimate(HostId(1)));
    let _ = PowerFlags::IDLE;
}
