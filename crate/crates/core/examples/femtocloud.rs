//! A single external generator feeding the devices, against the MEC at the
//! same total load.

use offload_sim::config::{run_cell, ScenarioConfig};
use offload_sim::metrics::summarize;
use offload_sim::{FallbackPolicy, Strategy};

fn main() {
    for mec_lambda in [6.0, 12.0] {
        for strategy in [Strategy::TMin, Strategy::Hybrid(FallbackPolicy::Tmin)] {
            let mec = ScenarioConfig::android_mec(strategy.clone());
            let fc = ScenarioConfig::femtocloud(strategy, mec_lambda);
            let mut mec = mec;
            mec.lambda = mec_lambda;
            for cfg in [mec, fc] {
                let s = summarize(&run_cell(&cfg));
                println!(
                    "{:<34} energy {:>6.2} mWh/job  time {:>5.2} s  qos {:.3}",
                    cfg.scenario_id(),
                    s.energy_per_job.expect("jobs completed").mean,
                    s.mean_completion_time.expect("jobs completed").mean,
                    s.qos.expect("jobs released").mean
                );
            }
        }
    }
}
