//! Mean relative error of the time estimate, with and without subtracting
//! the elapsed time of the running job. Negative means the estimate was
//! larger than the real completion time.

use offload_sim::config::{run_cell, ScenarioConfig};
use offload_sim::metrics::summarize;
use offload_sim::{FallbackPolicy, Strategy};

fn main() {
    for strategy in [Strategy::Local, Strategy::TMin, Strategy::Hybrid(FallbackPolicy::Tmin)] {
        for (lambda, deadline) in [(6.0, 6.0), (9.0, 9.0), (12.0, 9.0)] {
            let mut line = format!("{:<7} l{lambda} d{deadline}:", strategy.name());
            for corrected in [false, true] {
                let mut cfg = ScenarioConfig::android_mec(strategy.clone());
                cfg.lambda = lambda;
                cfg.deadline = deadline;
                cfg.corrected_tc = corrected;
                let err = summarize(&run_cell(&cfg)).estimation_error.expect("jobs completed");
                let label = if corrected { "corrected" } else { "plain" };
                line += &format!("  {label} {:+.3} ± {:.3}", err.mean, err.half_width);
            }
            println!("{line}");
        }
    }
}
