//! A small lambda x deadline x strategy grid, run in parallel and written
//! as CSV. Pass an output directory, or the files go to a temporary one.

use offload_sim::config::{sweep, ScenarioConfig, SweepGrid};
use offload_sim::metrics::{summarize, write_outputs};
use offload_sim::{FallbackPolicy, Strategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("offload-sweep"));
    let base = ScenarioConfig::android_mec(Strategy::TMin);
    let grid = SweepGrid {
        lambdas: vec![6.0, 12.0],
        deadlines: vec![3.0, 6.0, 9.0],
        strategies: vec![Strategy::TMin, Strategy::Hybrid(FallbackPolicy::Tmin)],
        repetitions: 3,
    };
    let cells = sweep(&base, &grid)?;
    let mut all = Vec::new();
    for cell in cells {
        let s = summarize(&cell.runs);
        println!(
            "{:<28} energy {:>5.2} mWh/job  qos {:.3}",
            cell.config.scenario_id(),
            s.energy_per_job.map_or(f64::NAN, |a| a.mean),
            s.qos.map_or(f64::NAN, |a| a.mean)
        );
        all.extend(cell.runs);
    }
    write_outputs(&out, &all)?;
    println!("{} runs written to {}", all.len(), out.display());
    Ok(())
}
