use thiserror::Error;

use crate::model::HostId;

/// Violations of a domain-type contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("relative deadline must be positive, got {0}")]
    NonPositiveDeadline(f64),
    #[error("job input size must be positive")]
    EmptyInput,
    #[error("job {0} has not completed")]
    NotCompleted(u64),
    #[error("invalid device profile `{name}`: {reason}")]
    InvalidProfile { name: String, reason: String },
}

/// An estimator had nothing to go on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("no {quantity} estimate for host {host}")]
    NoEstimate { host: HostId, quantity: &'static str },
    #[error("no link estimate from host {from} to host {to}")]
    NoLink { from: HostId, to: HostId },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("mean inter-arrival time must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("generation duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("unknown strategy `{0}` (expected one of local, server, tmin, emin, hybrid, balanced, lf:tmin, lf:hybrid, lf:balanced)")]
    UnknownStrategy(String),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}
