//! Parameter grids over lambda, deadline and strategy.

use rayon::prelude::*;

use super::ScenarioConfig;
use crate::error::ConfigError;
use crate::metrics::RunMetrics;
use crate::seed::{derive_seed, splitmix64};
use crate::sim::run;
use crate::strategy::Strategy;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "OFFLOAD_SIM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub lambdas: Vec<f64>,
    pub deadlines: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub repetitions: usize,
}

impl SweepGrid {
    /// `(lambda, deadline)` pairs with `deadline <= lambda`, lambda-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .flat_map(|&l| {
                self.deadlines
                    .iter()
                    .filter(move |&&d| d <= l)
                    .map(move |&d| (l, d))
            })
            .collect()
    }

    pub fn run_count(&self) -> usize {
        self.cells().len() * self.strategies.len() * self.repetitions
    }
}

/// Workload seed of one repetition of a `(lambda, deadline)` cell. The
/// strategy is deliberately not an input, so every strategy in a cell sees
/// the same jobs.
pub fn cell_seed(master: u64, lambda: f64, deadline: f64, rep: usize) -> u64 {
    let cell = splitmix64(lambda.to_bits()) ^ splitmix64(deadline.to_bits()).rotate_left(29);
    derive_seed(master, cell, rep as u64)
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub config: ScenarioConfig,
    pub runs: Vec<RunMetrics>,
}

/// Runs every repetition of one cell sequentially.
///
/// # Panics
///
/// Panics if the workload parameters are invalid; validate first.
pub fn run_cell(cfg: &ScenarioConfig) -> Vec<RunMetrics> {
    (0..cfg.repetitions).map(|rep| run_rep(cfg, rep)).collect()
}

fn run_rep(cfg: &ScenarioConfig, rep: usize) -> RunMetrics {
    let seed = cell_seed(cfg.seed, cfg.lambda, cfg.deadline, rep);
    let result = run(cfg, seed).expect("validated scenario");
    RunMetrics::from_run(&result, cfg.scenario_id())
}

/// Runs the whole grid. Results come back in grid order (lambda, deadline,
/// strategy) whatever the thread count.
pub fn sweep(base: &ScenarioConfig, grid: &SweepGrid) -> Result<Vec<CellResult>, ConfigError> {
    let mut configs = Vec::new();
    let mut errors = Vec::new();
    for (lambda, deadline) in grid.cells() {
        for strategy in &grid.strategies {
            let mut cfg = base.clone();
            cfg.lambda = lambda;
            cfg.deadline = deadline;
            cfg.strategy = strategy.clone();
            cfg.repetitions = grid.repetitions;
            cfg.trace = false;
            match cfg.validate() {
                Ok(_) => configs.push(cfg),
                Err(ConfigError::Invalid(msgs)) => {
                    errors.extend(msgs.into_iter().map(|m| format!("{}: {m}", cfg.scenario_id())))
                }
                Err(e) => return Err(e),
            }
        }
    }
    if !errors.is_empty() {
        errors.dedup();
        return Err(ConfigError::Invalid(errors));
    }

    let tasks: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..grid.repetitions).map(move |r| (c, r)))
        .collect();
    let exec = || -> Vec<RunMetrics> {
        tasks
            .par_iter()
            .map(|&(c, r)| run_rep(&configs[c], r))
            .collect()
    };
    let flat = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Invalid(vec![format!("thread pool: {e}")]))?
            .install(exec),
        None => exec(),
    };

    let mut flat = flat.into_iter();
    Ok(configs
        .into_iter()
        .map(|config| CellResult {
            runs: flat.by_ref().take(grid.repetitions).collect(),
            config,
        })
        .collect())
}

fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}; expected a positive integer");
            None
        }
    }
}
