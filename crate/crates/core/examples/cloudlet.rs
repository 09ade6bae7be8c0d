//! Adding a cloudlet to the Android MEC: energy cost and where jobs run.

use offload_sim::config::{run_cell, ScenarioConfig};
use offload_sim::metrics::{summarize, RunMetrics};
use offload_sim::{FallbackPolicy, HostId, Strategy};

fn shares(cfg: &ScenarioConfig, runs: &[RunMetrics]) -> String {
    (0..cfg.hosts.len())
        .map(|h| {
            let f: f64 = runs
                .iter()
                .map(|r| r.per_device_share.get(&HostId::from(h)).copied().unwrap_or(0.0))
                .sum::<f64>()
                / runs.len() as f64;
            format!("{} {:.0}%", cfg.hosts[h].name, 100.0 * f)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn main() {
    for strategy in [Strategy::TMin, Strategy::Hybrid(FallbackPolicy::Tmin)] {
        for cfg in [
            ScenarioConfig::android_mec(strategy.clone()),
            ScenarioConfig::cloudlet_mec(strategy.clone()),
        ] {
            let runs = run_cell(&cfg);
            let s = summarize(&runs);
            println!(
                "{:<30} {:>6.2} mWh/job  qos {:.3}",
                cfg.scenario_id(),
                s.energy_per_job.expect("jobs completed").mean,
                s.qos.expect("jobs released").mean
            );
            println!("    {}", shares(&cfg, &runs));
        }
    }
}
