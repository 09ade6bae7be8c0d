use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use offload_sim::config::{
    builtin_entries, cell_seed, load_and_validate, parse_scenario_with_warnings, sweep, ScenarioConfig,
    SweepGrid,
};
use offload_sim::metrics::{fmt_g6, summarize, write_outputs, write_trace, RunMetrics};
use offload_sim::model::joules_to_mwh;
use offload_sim::Strategy;

#[derive(Parser)]
#[command(name = "offload-sim", version, about = "Mobile edge cloud offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every repetition of one scenario.
    Run {
        config: PathBuf,
        /// Master seed, overriding the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write one NDJSON event trace per repetition.
        #[arg(long)]
        trace: bool,
    },
    /// Run a lambda x deadline x strategy grid (cells with deadline <= lambda).
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        deadline: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        strategy: Vec<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario file and report every problem.
    Validate { config: PathBuf },
    /// List the built-in device profiles.
    Profiles,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, seed, out, trace } => run(&config, seed, &out, trace),
        Command::Sweep { config, lambda, deadline, strategy, reps, seed, out } => {
            run_sweep(&config, lambda, deadline, &strategy, reps, seed, &out)
        }
        Command::Validate { config } => validate(&config),
        Command::Profiles => {
            profiles();
            Ok(())
        }
    }
}

fn run(path: &Path, seed: Option<u64>, out: &Path, trace: bool) -> Result<()> {
    let mut cfg = load_and_validate(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.trace = trace;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let id = cfg.scenario_id();
    let mut runs = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let result = offload_sim::run(&cfg, cell_seed(cfg.seed, cfg.lambda, cfg.deadline, rep))?;
        if trace {
            let file = out.join(format!("trace-{rep}.ndjson"));
            let w = BufWriter::new(File::create(&file).with_context(|| format!("creating {}", file.display()))?);
            write_trace(w, &result)?;
        }
        runs.push(RunMetrics::from_run(&result, id.clone()));
    }
    write_outputs(out, &runs)?;
    print_summary(&id, &runs);
    println!("wrote {}", out.display());
    Ok(())
}

fn run_sweep(
    path: &Path,
    lambdas: Vec<f64>,
    deadlines: Vec<f64>,
    strategies: &[String],
    reps: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut base, _) = parse_scenario_with_warnings(&text)?;
    if let Some(s) = seed {
        base.seed = s;
    }
    let strategies = strategies
        .iter()
        .map(|s| parse_strategy(&base, s))
        .collect::<Result<Vec<_>>>()?;
    let grid = SweepGrid {
        lambdas,
        deadlines,
        strategies,
        repetitions: reps.unwrap_or(base.repetitions),
    };
    if grid.cells().is_empty() {
        bail!("no cell has deadline <= lambda");
    }
    let cells = sweep(&base, &grid)?;
    let mut all = Vec::with_capacity(grid.run_count());
    for cell in &cells {
        print_summary(&cell.config.scenario_id(), &cell.runs);
        all.extend(cell.runs.iter().cloned());
    }
    write_outputs(out, &all)?;
    println!("{} runs, wrote {}", all.len(), out.display());
    Ok(())
}

fn parse_strategy(base: &ScenarioConfig, name: &str) -> Result<Strategy> {
    let fallback = match &base.strategy {
        Strategy::Hybrid(f) | Strategy::Balanced(f) => *f,
        Strategy::LocalFirst(inner) => match inner.as_ref() {
            Strategy::Hybrid(f) | Strategy::Balanced(f) => *f,
            _ => Default::default(),
        },
        _ => Default::default(),
    };
    let server = match &base.strategy {
        Strategy::Server(h) => Some(*h),
        _ => None,
    };
    Ok(Strategy::from_name(name, fallback, server)?)
}

fn validate(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (cfg, warnings) = parse_scenario_with_warnings(&text)?;
    for w in &warnings {
        println!("warning: {w}");
    }
    println!(
        "ok: {} ({} hosts, {} runs)",
        cfg.scenario_id(),
        cfg.hosts.len(),
        cfg.repetitions
    );
    Ok(())
}

fn profiles() {
    println!(
        "{:<10} {:>7} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8} {:>9}  role",
        "name", "TE[s]", "PC[W]", "PI[W]", "PU[W]", "PD[W]", "up[Mb]", "down[Mb]", "E/job[mWh]"
    );
    for e in builtin_entries() {
        let p = e.to_profile();
        println!(
            "{:<10} {:>7} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8} {:>9}  {:?}{}",
            e.name,
            fmt_g6(e.exec_time_s),
            fmt_g6(e.p_compute_w),
            fmt_g6(e.p_idle_w),
            fmt_g6(e.p_upload_w),
            fmt_g6(e.p_download_w),
            fmt_g6(e.uplink_mbps),
            fmt_g6(e.downlink_mbps),
            fmt_g6(joules_to_mwh(p.compute_energy_per_job())),
            e.role,
            if e.calibrated.is_empty() { "" } else { " *" },
        );
    }
    println!("* some values fitted rather than measured");
}

fn print_summary(id: &str, runs: &[RunMetrics]) {
    let s = summarize(runs);
    let show = |a: Option<offload_sim::metrics::Aggregate>| match a {
        Some(a) => format!("{}±{}", fmt_g6(a.mean), fmt_g6(a.half_width)),
        None => "-".into(),
    };
    println!(
        "{id}: energy/job {} mWh, time {} s, qos {}, error {}",
        show(s.energy_per_job),
        show(s.mean_completion_time),
        show(s.qos),
        show(s.estimation_error)
    );
}
