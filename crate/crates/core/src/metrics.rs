//! Evaluation metrics for a run, aggregation over repetitions, CSV output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::ReportError;
use crate::model::{joules_to_mwh, HostId, JobRecord};
use crate::sim::{EnergyLedger, RunResult};

/// Metrics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// `{scenario}:{strategy}:l{lambda}:d{deadline}`.
    pub scenario_id: String,
    pub strategy: String,
    pub lambda: f64,
    pub deadline: f64,
    pub seed: u64,
    pub host_names: Vec<String>,
    pub released: usize,
    pub completed: usize,
    pub on_time: usize,
    pub cancelled: usize,
    /// All hosts, idle time included.
    pub total_energy_j: f64,
    /// mWh per completed job.
    pub energy_per_job: Option<f64>,
    /// Mean release-to-completion span of completed jobs, seconds.
    pub mean_completion_time: Option<f64>,
    pub qos: Option<f64>,
    pub offload_ratio: Option<f64>,
    /// Fraction of completed jobs each host executed.
    pub per_device_share: BTreeMap<HostId, f64>,
    /// Completed jobs by `(origin, executor)`.
    pub flow_matrix: BTreeMap<(HostId, HostId), usize>,
    /// Mean signed relative error of the decision-time time estimate.
    pub estimation_error: Option<f64>,
}

impl RunMetrics {
    pub fn from_run(run: &RunResult, scenario_id: impl Into<String>) -> Self {
        let records = &run.records;
        let completed: Vec<&JobRecord> = records.iter().filter(|r| r.is_completed()).collect();
        let flow_matrix = flow_matrix(records);
        Self {
            scenario_id: scenario_id.into(),
            strategy: run.strategy.clone(),
            lambda: run.lambda,
            deadline: run.deadline,
            seed: run.seed,
            host_names: run.host_names.clone(),
            released: records.len(),
            completed: completed.len(),
            on_time: on_time_count(records),
            cancelled: records.len() - completed.len(),
            total_energy_j: run.ledger.total_joules(),
            energy_per_job: energy_per_job(&run.ledger, records),
            mean_completion_time: mean(completed.iter().filter_map(|r| r.completion_span())),
            qos: qos(records),
            offload_ratio: offload_ratio(&flow_matrix),
            per_device_share: per_device_share(&flow_matrix),
            flow_matrix,
            estimation_error: estimation_error(records),
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Total energy of every host in mWh divided by the completed job count.
pub fn energy_per_job(ledger: &EnergyLedger, records: &[JobRecord]) -> Option<f64> {
    energy_per_job_from(ledger.total_joules(), records.iter().filter(|r| r.is_completed()).count())
}

pub fn energy_per_job_from(total_joules: f64, completed: usize) -> Option<f64> {
    (completed > 0).then(|| joules_to_mwh(total_joules) / completed as f64)
}

fn on_time_count(records: &[JobRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.deadline_met().unwrap_or(false))
        .count()
}

/// Completed-and-on-time jobs over released jobs. `None` if nothing was
/// released.
pub fn qos(records: &[JobRecord]) -> Option<f64> {
    (!records.is_empty()).then(|| on_time_count(records) as f64 / records.len() as f64)
}

/// Signed relative error of a time estimate: negative when the estimate
/// was above the actual span (pessimistic), positive when it was below.
pub fn relative_error(estimate: f64, actual: f64) -> f64 {
    (actual - estimate) / actual
}

/// Mean [`relative_error`] over completed jobs, comparing the total-time
/// estimate the decision used with the release-to-completion span.
pub fn estimation_error(records: &[JobRecord]) -> Option<f64> {
    mean(records.iter().filter_map(|r| {
        let actual = r.completion_span()?;
        let est = r.estimate_at_decision?.total_time();
        (actual > 0.0).then(|| relative_error(est, actual))
    }))
}

pub fn flow_matrix(records: &[JobRecord]) -> BTreeMap<(HostId, HostId), usize> {
    let mut m = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_completed()) {
        if let Some(exec) = r.executor {
            *m.entry((r.spec.origin, exec)).or_insert(0) += 1;
        }
    }
    m
}

/// Share of completed jobs executed away from their origin.
pub fn offload_ratio(flows: &BTreeMap<(HostId, HostId), usize>) -> Option<f64> {
    let total: usize = flows.values().sum();
    let local: usize = flows.iter().filter(|((o, e), _)| o == e).map(|(_, c)| c).sum();
    (total > 0).then(|| 1.0 - local as f64 / total as f64)
}

pub fn per_device_share(flows: &BTreeMap<(HostId, HostId), usize>) -> BTreeMap<HostId, f64> {
    let total: usize = flows.values().sum();
    let mut shares = BTreeMap::new();
    if total == 0 {
        return shares;
    }
    for ((_, exec), count) in flows {
        *shares.entry(*exec).or_insert(0.0) += *count as f64 / total as f64;
    }
    shares
}

/// Mean and 95% gaussian confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

/// `1.96 * sd / sqrt(n)` with the sample standard deviation. A single value
/// has zero half-width; an empty slice has no aggregate.
pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let half_width = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    };
    Some(Aggregate { mean, half_width, n })
}

/// Aggregates of the headline metrics over a set of runs. Runs where a
/// metric is undefined are left out of that metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub energy_per_job: Option<Aggregate>,
    pub mean_completion_time: Option<Aggregate>,
    pub qos: Option<Aggregate>,
    pub offload_ratio: Option<Aggregate>,
    pub estimation_error: Option<Aggregate>,
}

pub fn summarize(runs: &[RunMetrics]) -> Summary {
    let agg = |f: fn(&RunMetrics) -> Option<f64>| {
        aggregate(&runs.iter().filter_map(f).collect::<Vec<_>>())
    };
    Summary {
        energy_per_job: agg(|r| r.energy_per_job),
        mean_completion_time: agg(|r| r.mean_completion_time),
        qos: agg(|r| r.qos),
        offload_ratio: agg(|r| r.offload_ratio),
        estimation_error: agg(|r| r.estimation_error),
    }
}

/// Formats like C's `%g`: six significant digits, trailing zeros dropped.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}

pub const RUNS_HEADER: [&str; 12] = [
    "scenario",
    "strategy",
    "lambda",
    "deadline",
    "seed",
    "energy_mwh_per_job",
    "mean_time_s",
    "qos",
    "offload_ratio",
    "est_error",
    "released",
    "completed",
];

/// One row per run.
pub fn write_runs<W: Write>(out: W, runs: &[RunMetrics]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in runs {
        w.write_record([
            r.scenario_id.clone(),
            r.strategy.clone(),
            fmt_g6(r.lambda),
            fmt_g6(r.deadline),
            r.seed.to_string(),
            opt(r.energy_per_job),
            opt(r.mean_completion_time),
            opt(r.qos),
            opt(r.offload_ratio),
            opt(r.estimation_error),
            r.released.to_string(),
            r.completed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Groups runs by scenario id, keeping first-appearance order.
fn by_scenario(runs: &[RunMetrics]) -> Vec<(&str, Vec<&RunMetrics>)> {
    let mut groups: Vec<(&str, Vec<&RunMetrics>)> = Vec::new();
    for r in runs {
        match groups.iter_mut().find(|(id, _)| *id == r.scenario_id) {
            Some((_, g)) => g.push(r),
            None => groups.push((&r.scenario_id, vec![r])),
        }
    }
    groups
}

/// Job counts by origin and executor, summed over each scenario's runs.
pub fn write_flows<W: Write>(out: W, runs: &[RunMetrics]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "origin", "executor", "count"])?;
    for (id, group) in by_scenario(runs) {
        let mut total: BTreeMap<(HostId, HostId), usize> = BTreeMap::new();
        for r in &group {
            for (k, c) in &r.flow_matrix {
                *total.entry(*k).or_insert(0) += c;
            }
        }
        let names = &group[0].host_names;
        for ((o, e), c) in total {
            w.write_record([id, &names[o.index()], &names[e.index()], &c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fraction of each scenario's completed jobs (over all its runs) that
/// each host executed.
pub fn write_shares<W: Write>(out: W, runs: &[RunMetrics]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "host", "fraction"])?;
    for (id, group) in by_scenario(runs) {
        let names = &group[0].host_names;
        let mut executed = vec![0usize; names.len()];
        for r in &group {
            for ((_, e), c) in &r.flow_matrix {
                executed[e.index()] += c;
            }
        }
        let total: usize = executed.iter().sum();
        for (h, name) in names.iter().enumerate() {
            let fraction = if total == 0 { 0.0 } else { executed[h] as f64 / total as f64 };
            w.write_record([id, name, &fmt_g6(fraction)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `runs.csv`, `flows.csv` and `shares.csv` into `dir`.
pub fn write_outputs(dir: &Path, runs: &[RunMetrics]) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir)?;
    write_runs(File::create(dir.join("runs.csv"))?, runs)?;
    write_flows(File::create(dir.join("flows.csv"))?, runs)?;
    write_shares(File::create(dir.join("shares.csv"))?, runs)?;
    Ok(())
}

/// Writes the event trace as one JSON object per line.
pub fn write_trace<W: Write>(mut out: W, run: &RunResult) -> Result<(), ReportError> {
    for rec in &run.trace {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
