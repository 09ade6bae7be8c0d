//! One job, three candidate hosts with hand-made estimates, and the choice
//! each strategy makes.

use offload_sim::model::{CostEstimate, HostId, JobSpec};
use offload_sim::strategy::{decide, Candidate, FallbackPolicy, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn candidate(host: u32, time: f64, energy: f64) -> Candidate {
    Candidate {
        host: HostId(host),
        estimate: CostEstimate {
            t_compute: time,
            e_compute: energy,
            ..Default::default()
        },
    }
}

fn main() {
    let job = JobSpec::new(0, HostId(0), 0.0, 6.0, 2_200_000, 4096).expect("valid job");
    // h0: the origin, slow but cheap. h1: fast, expensive. h2: in between.
    let candidates = [candidate(0, 7.0, 10.0), candidate(1, 2.0, 90.0), candidate(2, 5.0, 20.0)];
    let strategies = [
        Strategy::Local,
        Strategy::Server(HostId(1)),
        Strategy::TMin,
        Strategy::EMin,
        Strategy::Hybrid(FallbackPolicy::Tmin),
        Strategy::Balanced(FallbackPolicy::Tmin),
        Strategy::LocalFirst(Box::new(Strategy::Hybrid(FallbackPolicy::Tmin))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("deadline {} s", job.relative_deadline);
    for s in &strategies {
        let d = decide(s, &job, &candidates, &mut rng);
        let exec = d.executor.map_or("cancel".to_string(), |h| h.to_string());
        println!("{:<12} -> {:<6} feasible {:?}", s.name(), exec, d.feasible);
    }

    let tight = JobSpec::new(1, HostId(0), 0.0, 1.0, 2_200_000, 4096).expect("valid job");
    for policy in [FallbackPolicy::Tmin, FallbackPolicy::Cancel] {
        let d = decide(&Strategy::Hybrid(policy), &tight, &candidates, &mut rng);
        println!("hybrid, 1 s deadline, fallback {policy:?}: {:?}", d.executor);
    }
}
