//! Scenario definition, loading and validation.
//!
//! A scenario file is TOML. Top-level keys set the workload and policy; each
//! `[[hosts]]` table adds one host, either from a built-in profile or with
//! inline profile fields (which also override a built-in's values).
//!
//! ```toml
//! name = "android-mec"
//! strategy = "hybrid"          # local, server, tmin, emin, hybrid, balanced, lf:tmin, lf:hybrid, lf:balanced
//! lambda = 12.0                # mean inter-arrival time per generator, s
//! deadline = 9.0               # relative deadline, s
//! duration = 600.0             # optional, s
//! repetitions = 6              # optional
//! seed = 1                     # optional
//! dissemination_period = 1.0   # optional, s; 0 gives every decision a fresh view
//! contention = "fixed"         # optional, "fixed" or "fair"
//! corrected_tc = false         # optional
//! fallback = "tmin"            # optional, "tmin" or "cancel"
//! server_host = "cloudlet"     # required by strategy "server"
//! ma_window = 10               # optional, moving-average window
//! input_size = 2200000         # optional, bytes
//! output_size = 4096           # optional, bytes
//! jitter = 0.1                 # optional, overrides every host's jitter
//!
//! [[hosts]]
//! name = "pixel4"
//! profile = "pixel4"
//! role = "both"                # optional: generator, worker or both
//! ```
//!
//! Inline profile fields are `exec_time_s`, `p_compute_w`, `p_idle_w`,
//! `p_upload_w`, `p_download_w`, `uplink_mbps`, `downlink_mbps` and `jitter`.

mod profiles;
mod sweep;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{DeviceProfile, HostId, Role};
use crate::sim::{ContentionMode, WorkloadParams};
use crate::strategy::{FallbackPolicy, Strategy};

pub use profiles::{
    builtin_entries, builtin_profile, builtin_profiles, ProfileEntry, ANDROID_DEVICES, CLOUDLET,
};
pub use sweep::{cell_seed, run_cell, sweep, CellResult, SweepGrid, THREADS_ENV};

/// Default job input, bytes.
pub const DEFAULT_INPUT_SIZE: u64 = 2_200_000;
/// Default job output, bytes.
pub const DEFAULT_OUTPUT_SIZE: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct HostSpec {
    pub name: String,
    pub profile: DeviceProfile,
    pub role: Role,
}

impl HostSpec {
    /// A host running a built-in profile in its default role.
    pub fn builtin(name: &str) -> Option<HostSpec> {
        let profile = builtin_profile(name)?;
        Some(HostSpec {
            name: name.to_string(),
            role: profile.role,
            profile,
        })
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self.profile.role = role;
        self
    }
}

/// A fully defaulted scenario, ready to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub hosts: Vec<HostSpec>,
    pub strategy: Strategy,
    pub lambda: f64,
    pub deadline: f64,
    pub duration: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub dissemination_period: f64,
    pub contention: ContentionMode,
    pub corrected_tc: bool,
    pub ma_window: usize,
    pub input_size: u64,
    pub output_size: u64,
    /// Keep a per-event trace in the run result.
    pub trace: bool,
}

impl ScenarioConfig {
    /// Defaults: lambda 12 s, deadline 9 s, 600 s, 6 repetitions, seed 1,
    /// 1 s dissemination, fixed-rate links, window 10.
    pub fn new(name: impl Into<String>, hosts: Vec<HostSpec>, strategy: Strategy) -> Self {
        Self {
            name: name.into(),
            hosts,
            strategy,
            lambda: 12.0,
            deadline: 9.0,
            duration: 600.0,
            repetitions: 6,
            seed: 1,
            dissemination_period: 1.0,
            contention: ContentionMode::Fixed,
            corrected_tc: false,
            ma_window: 10,
            input_size: DEFAULT_INPUT_SIZE,
            output_size: DEFAULT_OUTPUT_SIZE,
            trace: false,
        }
    }

    /// Every device generates and executes jobs.
    pub fn android_mec(strategy: Strategy) -> Self {
        let hosts = ANDROID_DEVICES
            .iter()
            .map(|n| HostSpec::builtin(n).expect("built-in"))
            .collect();
        Self::new("android-mec", hosts, strategy)
    }

    /// Android MEC plus a cloudlet that only executes.
    pub fn cloudlet_mec(strategy: Strategy) -> Self {
        let mut cfg = Self::android_mec(strategy);
        cfg.name = "cloudlet-mec".into();
        cfg.hosts.push(HostSpec::builtin(CLOUDLET).expect("built-in"));
        cfg
    }

    /// One external generator feeding the Android devices as pure workers.
    /// The generator's rate is scaled so the total load equals the MEC one.
    pub fn femtocloud(strategy: Strategy, mec_lambda: f64) -> Self {
        let mut hosts: Vec<HostSpec> = ANDROID_DEVICES
            .iter()
            .map(|n| HostSpec::builtin(n).expect("built-in").with_role(Role::Worker))
            .collect();
        hosts.push(HostSpec {
            name: "generator".into(),
            profile: femtocloud_generator_profile(),
            role: Role::Generator,
        });
        let mut cfg = Self::new("femtocloud", hosts, strategy);
        cfg.lambda = mec_lambda / ANDROID_DEVICES.len() as f64;
        cfg
    }

    pub fn host_id(&self, name: &str) -> Option<HostId> {
        self.hosts.iter().position(|h| h.name == name).map(HostId::from)
    }

    pub fn host_name(&self, host: HostId) -> &str {
        &self.hosts[host.index()].name
    }

    pub fn generators(&self) -> Vec<HostId> {
        self.ids_where(|r| r.generates())
    }

    pub fn workers(&self) -> Vec<HostId> {
        self.ids_where(|r| r.works())
    }

    fn ids_where(&self, f: impl Fn(Role) -> bool) -> Vec<HostId> {
        (0..self.hosts.len())
            .filter(|&i| f(self.hosts[i].role))
            .map(HostId::from)
            .collect()
    }

    /// Exactly one pure generator and every other host a pure worker.
    pub fn is_femtocloud(&self) -> bool {
        let gens = self.hosts.iter().filter(|h| h.role == Role::Generator).count();
        let workers = self.hosts.iter().filter(|h| h.role == Role::Worker).count();
        gens == 1 && workers == self.hosts.len() - 1
    }

    pub fn workload_params(&self) -> WorkloadParams {
        WorkloadParams {
            lambda: self.lambda,
            deadline: self.deadline,
            duration: self.duration,
            input_size: self.input_size,
            output_size: self.output_size,
        }
    }

    /// Sets every host's execution-time jitter.
    pub fn with_jitter(mut self, jitter: f64) -> Self {
        for h in &mut self.hosts {
            h.profile.exec_time_jitter = jitter;
        }
        self
    }

    /// Identifier of one `(scenario, strategy, lambda, deadline)` cell.
    pub fn scenario_id(&self) -> String {
        format!(
            "{}:{}:l{}:d{}",
            self.name,
            self.strategy.name(),
            crate::metrics::fmt_g6(self.lambda),
            crate::metrics::fmt_g6(self.deadline)
        )
    }

    /// Checks every rule and reports all violations at once. Returns the
    /// warnings when the scenario is usable.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let mut errors = self.parameter_errors();
        errors.extend(self.topology_errors());
        if errors.is_empty() {
            Ok(self.warnings())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    fn parameter_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if !(self.lambda > 0.0) {
            errors.push(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.deadline > 0.0) {
            errors.push(format!("deadline must be positive, got {}", self.deadline));
        }
        if !(self.duration > 0.0) {
            errors.push(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.dissemination_period >= 0.0) || !self.dissemination_period.is_finite() {
            errors.push(format!(
                "dissemination_period must be a finite non-negative number, got {}",
                self.dissemination_period
            ));
        }
        if self.ma_window == 0 {
            errors.push("ma_window must be at least 1".into());
        }
        if self.repetitions == 0 {
            errors.push("repetitions must be at least 1".into());
        }
        if self.input_size == 0 {
            errors.push("input_size must be positive".into());
        }
        errors
    }

    fn topology_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.hosts.is_empty() {
            errors.push("scenario has no hosts".to_string());
            return errors;
        }
        let mut names = BTreeSet::new();
        for h in &self.hosts {
            if !names.insert(h.name.as_str()) {
                errors.push(format!("duplicate host name `{}`", h.name));
            }
            if let Err(e) = h.profile.validate() {
                errors.push(format!("host `{}`: {e}", h.name));
            }
        }
        if self.workers().is_empty() {
            errors.push("no host can execute jobs (need a worker)".into());
        }
        if self.generators().is_empty() {
            errors.push("no host generates jobs (need a generator)".into());
        }
        if self.strategy.is_local_first() && self.is_femtocloud() {
            errors.push(format!(
                "strategy `{}` runs jobs at their origin first, but in a femtocloud scenario the \
                 single generator does not execute jobs; use tmin, emin, hybrid or balanced",
                self.strategy
            ));
        } else if self.strategy.needs_local_worker() {
            for h in &self.hosts {
                if h.role == Role::Generator {
                    errors.push(format!(
                        "strategy `{}` needs every generator to execute jobs, but `{}` is generator-only",
                        self.strategy, h.name
                    ));
                }
            }
        }
        if let Strategy::Server(server) = self.strategy {
            match self.hosts.get(server.index()) {
                None => errors.push(format!("server host {server} does not exist")),
                Some(h) if h.role != Role::Worker => errors.push(format!(
                    "server host `{}` must have role worker, has {:?}",
                    h.name, h.role
                )),
                Some(_) => {}
            }
        }
        errors
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.deadline > self.lambda {
            warnings.push(format!(
                "deadline {} exceeds lambda {}; jobs may be released faster than they must finish",
                self.deadline, self.lambda
            ));
        }
        warnings
    }
}

/// The external femtocloud job source: a laptop-class machine that only
/// generates and schedules jobs.
pub fn femtocloud_generator_profile() -> DeviceProfile {
    DeviceProfile {
        name: "generator".into(),
        p_idle: 6.0,
        p_compute: 15.0,
        p_upload: 8.0,
        p_download: 7.0,
        exec_time_mean: 2.0,
        exec_time_jitter: 0.1,
        uplink_bw: 941e6,
        downlink_bw: 946e6,
        role: Role::Generator,
    }
}

/// Scenario file as written on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_name")]
    pub name: String,
    pub strategy: String,
    pub lambda: f64,
    pub deadline: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_period")]
    pub dissemination_period: f64,
    #[serde(default)]
    pub contention: ContentionMode,
    #[serde(default)]
    pub corrected_tc: bool,
    #[serde(default)]
    pub fallback: FallbackPolicy,
    #[serde(default)]
    pub server_host: Option<String>,
    #[serde(default = "default_window")]
    pub ma_window: usize,
    #[serde(default = "default_input")]
    pub input_size: u64,
    #[serde(default = "default_output")]
    pub output_size: u64,
    #[serde(default)]
    pub jitter: Option<f64>,
    pub hosts: Vec<HostEntry>,
}

/// One `[[hosts]]` table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostEntry {
    pub name: String,
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub role: Option<Role>,
    #[serde(default)]
    pub exec_time_s: Option<f64>,
    #[serde(default)]
    pub p_compute_w: Option<f64>,
    #[serde(default)]
    pub p_idle_w: Option<f64>,
    #[serde(default)]
    pub p_upload_w: Option<f64>,
    #[serde(default)]
    pub p_download_w: Option<f64>,
    #[serde(default)]
    pub uplink_mbps: Option<f64>,
    #[serde(default)]
    pub downlink_mbps: Option<f64>,
    #[serde(default)]
    pub jitter: Option<f64>,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_duration() -> f64 {
    600.0
}
fn default_repetitions() -> usize {
    6
}
fn default_seed() -> u64 {
    1
}
fn default_period() -> f64 {
    1.0
}
fn default_window() -> usize {
    10
}
fn default_input() -> u64 {
    DEFAULT_INPUT_SIZE
}
fn default_output() -> u64 {
    DEFAULT_OUTPUT_SIZE
}

impl HostEntry {
    fn resolve(&self, errors: &mut Vec<String>) -> Option<HostSpec> {
        let base = match &self.profile {
            Some(p) => match builtin_profile(p) {
                Some(prof) => Some(prof),
                None => {
                    let known: Vec<&str> = builtin_entries().iter().map(|e| e.name.as_str()).collect();
                    errors.push(format!(
                        "host `{}`: unknown profile `{p}` (built-ins: {})",
                        self.name,
                        known.join(", ")
                    ));
                    return None;
                }
            },
            None => None,
        };
        let pick = |field: Option<f64>, from_base: Option<f64>, key: &str, errors: &mut Vec<String>| {
            let v = field.or(from_base);
            if v.is_none() {
                errors.push(format!(
                    "host `{}`: no profile given and `{key}` is missing",
                    self.name
                ));
            }
            v
        };
        let b = base.as_ref();
        let exec = pick(self.exec_time_s, b.map(|p| p.exec_time_mean), "exec_time_s", errors);
        let pc = pick(self.p_compute_w, b.map(|p| p.p_compute), "p_compute_w", errors);
        let pi = pick(self.p_idle_w, b.map(|p| p.p_idle), "p_idle_w", errors);
        let pu = pick(self.p_upload_w, b.map(|p| p.p_upload), "p_upload_w", errors);
        let pd = pick(self.p_download_w, b.map(|p| p.p_download), "p_download_w", errors);
        let up = pick(self.uplink_mbps.map(|m| m * 1e6), b.map(|p| p.uplink_bw), "uplink_mbps", errors);
        let down = pick(
            self.downlink_mbps.map(|m| m * 1e6),
            b.map(|p| p.downlink_bw),
            "downlink_mbps",
            errors,
        );
        let jitter = self.jitter.or(b.map(|p| p.exec_time_jitter)).unwrap_or(0.0);
        let role = self.role.or(b.map(|p| p.role)).unwrap_or(Role::Both);
        Some(HostSpec {
            name: self.name.clone(),
            role,
            profile: DeviceProfile {
                name: b.map_or_else(|| self.name.clone(), |p| p.name.clone()),
                p_idle: pi?,
                p_compute: pc?,
                p_upload: pu?,
                p_download: pd?,
                exec_time_mean: exec?,
                exec_time_jitter: jitter,
                uplink_bw: up?,
                downlink_bw: down?,
                role,
            },
        })
    }
}

impl ScenarioFile {
    /// Resolves profiles and strategy, then validates. All problems are
    /// reported together.
    pub fn resolve(&self) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
        let mut errors = Vec::new();
        let hosts: Vec<HostSpec> = self
            .hosts
            .iter()
            .filter_map(|h| h.resolve(&mut errors))
            .collect();

        let server = match &self.server_host {
            Some(name) => match self.hosts.iter().position(|h| &h.name == name) {
                Some(i) => Some(HostId::from(i)),
                None => {
                    errors.push(format!("server_host `{name}` is not one of the hosts"));
                    None
                }
            },
            None => None,
        };
        let strategy = match Strategy::from_name(&self.strategy, self.fallback, server) {
            Ok(s) => Some(s),
            Err(ConfigError::Invalid(msgs)) => {
                if self.server_host.is_none() {
                    errors.extend(msgs);
                }
                None
            }
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        let strategy_ok = strategy.is_some();
        let hosts_ok = hosts.len() == self.hosts.len();
        let mut cfg = self.base_config(hosts, strategy.unwrap_or(Strategy::TMin));
        if let Some(j) = self.jitter {
            cfg = cfg.with_jitter(j);
        }
        errors.extend(cfg.parameter_errors());
        if strategy_ok && hosts_ok {
            errors.extend(cfg.topology_errors());
        }
        if errors.is_empty() {
            let warnings = cfg.warnings();
            Ok((cfg, warnings))
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    fn base_config(&self, hosts: Vec<HostSpec>, strategy: Strategy) -> ScenarioConfig {
        ScenarioConfig {
            name: self.name.clone(),
            hosts,
            strategy,
            lambda: self.lambda,
            deadline: self.deadline,
            duration: self.duration,
            repetitions: self.repetitions,
            seed: self.seed,
            dissemination_period: self.dissemination_period,
            contention: self.contention,
            corrected_tc: self.corrected_tc,
            ma_window: self.ma_window,
            input_size: self.input_size,
            output_size: self.output_size,
            trace: false,
        }
    }
}

/// Parses and validates scenario text. Warnings are logged.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = toml::from_str(text)?;
    let (cfg, warnings) = file.resolve()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(cfg)
}

/// Same as [`parse_scenario`], returning the warnings instead of logging.
pub fn parse_scenario_with_warnings(text: &str) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
    let file: ScenarioFile = toml::from_str(text)?;
    file.resolve()
}

pub fn load_and_validate(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        strategy = "hybrid"
        lambda = 12.0
        deadline = 9.0
        [[hosts]]
        name = "a"
        profile = "pixel4"
        [[hosts]]
        name = "b"
        profile = "s7e"
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_scenario(MINIMAL).unwrap();
        assert_eq!(cfg.duration, 600.0);
        assert_eq!(cfg.repetitions, 6);
        assert_eq!(cfg.dissemination_period, 1.0);
        assert_eq!(cfg.ma_window, 10);
        assert_eq!(cfg.input_size, 2_200_000);
        assert_eq!(cfg.contention, ContentionMode::Fixed);
        assert_eq!(cfg.strategy, Strategy::Hybrid(FallbackPolicy::Tmin));
        assert_eq!(cfg.hosts[1].profile, builtin_profile("s7e").unwrap());
        assert_eq!(cfg.hosts[0].role, Role::Both);
    }

    #[test]
    fn deadline_above_lambda_only_warns() {
        let text = MINIMAL.replace("lambda = 12.0", "lambda = 6.0");
        let (_, warnings) = parse_scenario_with_warnings(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("exceeds lambda"));
    }

    #[test]
    fn femtocloud_rejects_local_first() {
        let cfg = ScenarioConfig::femtocloud(
            Strategy::LocalFirst(Box::new(Strategy::TMin)),
            9.0,
        );
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("femtocloud"), "{err}");
        assert!(ScenarioConfig::femtocloud(Strategy::TMin, 9.0).validate().is_ok());
    }

    #[test]
    fn all_errors_reported_together() {
        let text = r#"
            strategy = "fastest"
            lambda = -1.0
            deadline = 0.0
            [[hosts]]
            name = "g"
            profile = "nope"
        "#;
        let err = parse_scenario(text).unwrap_err();
        let ConfigError::Invalid(msgs) = err else {
            panic!("expected a list of problems")
        };
        let joined = msgs.join("\n");
        assert!(joined.contains("unknown strategy"), "{joined}");
        assert!(joined.contains("unknown profile"), "{joined}");
        assert!(joined.contains("lambda must be positive"), "{joined}");
        assert!(joined.contains("deadline must be positive"), "{joined}");
    }

    #[test]
    fn inline_profile_and_overrides() {
        let text = r#"
            strategy = "tmin"
            lambda = 2.0
            deadline = 2.0
            jitter = 0.0
            [[hosts]]
            name = "src"
            role = "generator"
            exec_time_s = 1.0
            p_compute_w = 10.0
            p_idle_w = 5.0
            p_upload_w = 6.0
            p_download_w = 6.0
            uplink_mbps = 100.0
            downlink_mbps = 100.0
            [[hosts]]
            name = "w"
            profile = "tab_s5e"
            role = "worker"
            exec_time_s = 3.0
        "#;
        let cfg = parse_scenario(text).unwrap();
        assert!(cfg.is_femtocloud());
        assert_eq!(cfg.hosts[0].profile.uplink_bw, 100e6);
        assert_eq!(cfg.hosts[1].profile.exec_time_mean, 3.0);
        assert_eq!(cfg.hosts[1].profile.p_compute, 4.5);
        assert!(cfg.hosts.iter().all(|h| h.profile.exec_time_jitter == 0.0));
    }

    #[test]
    fn inline_profile_missing_fields() {
        let text = r#"
            strategy = "tmin"
            lambda = 2.0
            deadline = 2.0
            [[hosts]]
            name = "src"
            exec_time_s = 1.0
        "#;
        let msg = parse_scenario(text).unwrap_err().to_string();
        assert!(msg.contains("p_compute_w") && msg.contains("downlink_mbps"), "{msg}");
    }

    #[test]
    fn server_must_be_a_worker() {
        let base = |server: &str| {
            format!(
                r#"
                strategy = "server"
                server_host = "{server}"
                lambda = 9.0
                deadline = 9.0
                [[hosts]]
                name = "phone"
                profile = "pixel4"
                [[hosts]]
                name = "cloudlet"
                profile = "cloudlet"
                "#
            )
        };
        let cfg = parse_scenario(&base("cloudlet")).unwrap();
        assert_eq!(cfg.strategy, Strategy::Server(HostId(1)));
        assert!(parse_scenario(&base("phone")).unwrap_err().to_string().contains("role worker"));
        assert!(parse_scenario(&base("missing")).unwrap_err().to_string().contains("not one of the hosts"));
    }

    #[test]
    fn local_needs_executing_generators() {
        let cfg = ScenarioConfig::femtocloud(Strategy::Local, 9.0);
        assert!(cfg.validate().unwrap_err().to_string().contains("generator-only"));
    }

    #[test]
    fn no_workers_rejected() {
        let mut cfg = ScenarioConfig::android_mec(Strategy::TMin);
        for h in &mut cfg.hosts {
            h.role = Role::Generator;
        }
        assert!(cfg.validate().unwrap_err().to_string().contains("need a worker"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(parse_scenario(&text).is_err());
    }
}
