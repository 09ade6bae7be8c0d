//! Poisson job release streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::WorkloadError;
use crate::model::{HostId, JobSpec};
use crate::seed::{derive_seed, STREAM_WORKLOAD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadParams {
    /// Mean inter-arrival time per generator, seconds.
    pub lambda: f64,
    /// Relative deadline shared by every job.
    pub deadline: f64,
    /// Releases stop at this time.
    pub duration: f64,
    pub input_size: u64,
    pub output_size: u64,
}

/// Release times of a Poisson process with mean gap `lambda` on
/// `(0, duration)`.
pub fn poisson_arrivals<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    duration: f64,
) -> Result<Vec<f64>, WorkloadError> {
    if !(lambda > 0.0) {
        return Err(WorkloadError::NonPositiveLambda(lambda));
    }
    if !(duration > 0.0) {
        return Err(WorkloadError::NonPositiveDuration(duration));
    }
    let gaps = Exp::new(1.0 / lambda).expect("rate is positive and finite");
    let mut t = 0.0;
    let mut out = Vec::new();
    loop {
        t += gaps.sample(rng);
        if t >= duration {
            return Ok(out);
        }
        out.push(t);
    }
}

/// Jobs for every generator, ordered by release time (then origin). Ids are
/// assigned in that order starting at zero.
///
/// Each generator draws from its own stream keyed by `(seed, host)`, so the
/// jobs of one generator do not depend on which other generators exist.
pub fn generate_workload(
    generators: &[HostId],
    params: &WorkloadParams,
    seed: u64,
) -> Result<Vec<JobSpec>, WorkloadError> {
    if params.deadline > params.lambda {
        log::warn!(
            "relative deadline {} exceeds mean inter-arrival time {}",
            params.deadline,
            params.lambda
        );
    }
    let mut releases: Vec<(f64, HostId)> = Vec::new();
    for &host in generators {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_WORKLOAD, host.0 as u64));
        releases.extend(
            poisson_arrivals(&mut rng, params.lambda, params.duration)?
                .into_iter()
                .map(|t| (t, host)),
        );
    }
    releases.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    releases
        .into_iter()
        .enumerate()
        .map(|(id, (t, origin))| {
            JobSpec::new(
                id as u64,
                origin,
                t,
                params.deadline,
                params.input_size,
                params.output_size,
            )
            .map_err(WorkloadError::from)
        })
        .collect()
}
