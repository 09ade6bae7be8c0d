//! How stale a peer's view of a worker gets between dissemination ticks.

use offload_sim::config::ScenarioConfig;
use offload_sim::sim::Simulation;
use offload_sim::{HostId, JobSpec, Strategy};

fn main() {
    let mut cfg = ScenarioConfig::android_mec(Strategy::Server(HostId(0)));
    cfg.hosts[0] = cfg.hosts[0].clone().with_role(offload_sim::Role::Worker);
    cfg.duration = 12.0;
    cfg.dissemination_period = 2.0;
    // Five jobs from the S7e land on the Pixel 4 in quick succession.
    let jobs = (0..5)
        .map(|i| JobSpec::new(i, HostId(3), 0.5 + 0.3 * i as f64, 30.0, 2_200_000, 4096).expect("valid job"))
        .collect();
    let mut sim = Simulation::with_jobs(&cfg, 1, jobs);
    for t in [0.4, 1.0, 1.9, 2.1, 4.1, 6.1] {
        sim.run_until(t);
        let seen = sim.known_snapshot(HostId(1), HostId(0)).map(|s| (s.queue_length, s.snapshot_time));
        println!(
            "t={t:>4}: pixel4 holds {} jobs; mi9t believes {:?} (count, as of)",
            sim.queue_length(HostId(0)),
            seen
        );
    }
}
