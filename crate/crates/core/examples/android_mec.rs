//! The five-device Android MEC at lambda 12 s, deadline 9 s, under LOCAL,
//! TMIN and HYBRID.

use offload_sim::config::{run_cell, ScenarioConfig};
use offload_sim::metrics::summarize;
use offload_sim::{FallbackPolicy, Strategy};

fn main() {
    for strategy in [Strategy::Local, Strategy::TMin, Strategy::Hybrid(FallbackPolicy::Tmin)] {
        let cfg = ScenarioConfig::android_mec(strategy);
        let runs = run_cell(&cfg);
        let s = summarize(&runs);
        let e = s.energy_per_job.expect("jobs completed");
        let t = s.mean_completion_time.expect("jobs completed");
        let q = s.qos.expect("jobs released");
        println!(
            "{:<7} energy {:.2} ± {:.2} mWh/job   time {:.2} ± {:.2} s   qos {:.3}",
            cfg.strategy.name(),
            e.mean,
            e.half_width,
            t.mean,
            t.half_width,
            q.mean
        );
    }
}
