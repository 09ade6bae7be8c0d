//! Time and energy estimation for placing a job on a candidate host.
//!
//! For a job `j` released at origin `o` and a candidate `h`:
//!
//! ```text
//! TC = (n(h) + 1) * TE(h)            TI = BI(h) * |j|_in     TO = BO(h) * |j|_out
//! EC = TE(h) * PC(h)                 EI = TI * (PU(o) + PD(h))
//!                                    EO = TO * (PD(o) + PU(h))
//! T  = TI + TC + TO                  E  = EI + EC + EO
//! ```
//!
//! `B` is stored as seconds per byte. The origin itself never pays transfer
//! time or transfer energy.

mod moving_average;
mod profiler;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use moving_average::MovingAverage;
pub use profiler::{Direction, JobEvent, JobEventKind, Profiler, ProfilerSeeds};

use crate::error::EstimateError;
use crate::model::{CostEstimate, HostId, HostSnapshot, JobSpec, LinkEstimate};

/// Which activities a host is engaged in right now.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PowerFlags {
    pub computing: bool,
    pub uploading: bool,
    pub downloading: bool,
}

impl PowerFlags {
    pub const IDLE: PowerFlags = PowerFlags {
        computing: false,
        uploading: false,
        downloading: false,
    };

    pub fn active_count(self) -> usize {
        self.computing as usize + self.uploading as usize + self.downloading as usize
    }

    pub fn is_idle(self) -> bool {
        self.active_count() == 0
    }
}

/// Knobs that change how estimates are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimateOptions {
    /// Subtract the time the running job has already spent executing.
    pub corrected_tc: bool,
    /// Decision time; only consulted when `corrected_tc` is set.
    pub now: f64,
}

/// What an origin host knows when it decides where a job runs.
///
/// Snapshots of remote hosts may be stale; the origin's own snapshot is
/// current. Links are keyed by peer and always start at the origin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct View {
    pub origin: HostId,
    pub snapshots: BTreeMap<HostId, HostSnapshot>,
    pub links: BTreeMap<HostId, LinkEstimate>,
}

impl View {
    pub fn new(origin: HostId) -> Self {
        Self {
            origin,
            ..Self::default()
        }
    }

    pub fn with_snapshot(mut self, snapshot: HostSnapshot) -> Self {
        self.snapshots.insert(snapshot.host, snapshot);
        self
    }

    pub fn with_link(mut self, link: LinkEstimate) -> Self {
        self.links.insert(link.to, link);
        self
    }
}

/// `(n + 1) * TE`: wait for every job already held, then run this one.
pub fn estimate_compute_time(snapshot: &HostSnapshot) -> Result<f64, EstimateError> {
    let te = snapshot.te_avg.ok_or(EstimateError::NoEstimate {
        host: snapshot.host,
        quantity: "execution time",
    })?;
    Ok((snapshot.queue_length as f64 + 1.0) * te)
}

/// Like [`estimate_compute_time`], minus the part of the running job that
/// has already executed by `now`. The running job is never credited more
/// than one full `TE`.
pub fn estimate_compute_time_corrected(
    snapshot: &HostSnapshot,
    now: f64,
) -> Result<f64, EstimateError> {
    let full = estimate_compute_time(snapshot)?;
    match (snapshot.running_since, snapshot.te_avg) {
        (Some(start), Some(te)) if snapshot.queue_length > 0 => {
            let elapsed = (now - start).clamp(0.0, te);
            Ok(full - elapsed)
        }
        _ => Ok(full),
    }
}

/// Input and output transfer times for running `spec` on `candidate`.
///
/// Zero for the origin itself; otherwise a link from the origin is required.
pub fn estimate_transfer_times(
    link: Option<&LinkEstimate>,
    spec: &JobSpec,
    candidate: HostId,
) -> Result<(f64, f64), EstimateError> {
    if candidate == spec.origin {
        return Ok((0.0, 0.0));
    }
    let link = link.ok_or(EstimateError::NoLink {
        from: spec.origin,
        to: candidate,
    })?;
    Ok((
        link.ul_time_per_byte * spec.input_size as f64,
        link.dl_time_per_byte * spec.output_size as f64,
    ))
}

/// Energy for input transfer, effective computation and output transfer.
///
/// `t_exec` is the effective execution time `TE`, not `TC`: energy is only
/// charged while the candidate actually computes.
pub fn estimate_energy(
    t_in: f64,
    t_exec: f64,
    t_out: f64,
    origin: &HostSnapshot,
    candidate: &HostSnapshot,
) -> Result<(f64, f64, f64), EstimateError> {
    let need = |value: Option<f64>, host: HostId, quantity: &'static str| {
        value.ok_or(EstimateError::NoEstimate { host, quantity })
    };
    let pc = need(candidate.pc_avg, candidate.host, "compute power")?;
    let e_compute = t_exec * pc;
    if origin.host == candidate.host {
        return Ok((0.0, e_compute, 0.0));
    }
    let pu_origin = need(origin.pu_avg, origin.host, "upload power")?;
    let pd_origin = need(origin.pd_avg, origin.host, "download power")?;
    let pu_cand = need(candidate.pu_avg, candidate.host, "upload power")?;
    let pd_cand = need(candidate.pd_avg, candidate.host, "download power")?;
    let e_in = t_in * (pu_origin + pd_cand);
    let e_out = t_out * (pd_origin + pu_cand);
    Ok((e_in, e_compute, e_out))
}

/// Composes the time and energy estimates for one candidate host.
pub fn full_estimate(
    spec: &JobSpec,
    candidate: HostId,
    view: &View,
    opts: EstimateOptions,
) -> Result<CostEstimate, EstimateError> {
    debug_assert_eq!(spec.origin, view.origin, "view belongs to another origin");
    let cand = view.snapshots.get(&candidate).ok_or(EstimateError::NoEstimate {
        host: candidate,
        quantity: "host state",
    })?;
    let origin = view.snapshots.get(&spec.origin).ok_or(EstimateError::NoEstimate {
        host: spec.origin,
        quantity: "host state",
    })?;

    let t_compute = if opts.corrected_tc {
        estimate_compute_time_corrected(cand, opts.now)?
    } else {
        estimate_compute_time(cand)?
    };
    let (t_in, t_out) = estimate_transfer_times(view.links.get(&candidate), spec, candidate)?;
    let te = cand.te_avg.ok_or(EstimateError::NoEstimate {
        host: candidate,
        quantity: "execution time",
    })?;
    let (e_in, e_compute, e_out) = estimate_energy(t_in, te, t_out, origin, cand)?;

    Ok(CostEstimate {
        t_in,
        t_compute,
        t_out,
        e_in,
        e_compute,
        e_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn snap(host: u32, n: usize, te: f64, pc: f64, pu: f64, pd: f64) -> HostSnapshot {
        HostSnapshot {
            host: HostId(host),
            queue_length: n,
            te_avg: Some(te),
            pc_avg: Some(pc),
            pu_avg: Some(pu),
            pd_avg: Some(pd),
            running_since: None,
            snapshot_time: 0.0,
        }
    }

    fn job(origin: u32) -> JobSpec {
        JobSpec::new(7, HostId(origin), 0.0, 9.0, 2_200_000, 4096).unwrap()
    }

    #[test]
    fn compute_time_counts_queue_plus_one() {
        assert_eq!(estimate_compute_time(&snap(0, 0, 4.0, 1.0, 1.0, 1.0)).unwrap(), 4.0);
        assert_eq!(estimate_compute_time(&snap(0, 3, 2.0, 1.0, 1.0, 1.0)).unwrap(), 8.0);
        assert_relative_eq!(
            estimate_compute_time(&snap(0, 1, 5.4, 1.0, 1.0, 1.0)).unwrap(),
            10.8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn compute_time_without_estimate() {
        let mut s = snap(2, 0, 1.0, 1.0, 1.0, 1.0);
        s.te_avg = None;
        assert!(matches!(
            estimate_compute_time(&s),
            Err(EstimateError::NoEstimate { host: HostId(2), .. })
        ));
    }

    #[test]
    fn corrected_compute_time_subtracts_elapsed() {
        let mut s = snap(0, 2, 4.0, 1.0, 1.0, 1.0);
        s.running_since = Some(10.0);
        assert_eq!(estimate_compute_time_corrected(&s, 11.5).unwrap(), 12.0 - 1.5);
        // overran its mean: credit at most one TE
        assert_eq!(estimate_compute_time_corrected(&s, 30.0).unwrap(), 8.0);
    }

    #[test]
    fn transfer_times_from_measured_rates() {
        let link = LinkEstimate::from_rates(HostId(0), HostId(1), 110e6, 210e6);
        let (t_in, t_out) = estimate_transfer_times(Some(&link), &job(0), HostId(1)).unwrap();
        assert_relative_eq!(t_in, 0.16, max_relative = 1e-12);
        assert_relative_eq!(t_out, 4096.0 * 8.0 / 210e6, max_relative = 1e-12);
        assert_relative_eq!(t_out, 1.56e-4, max_relative = 1e-3);
    }

    #[test]
    fn transfer_times_local_and_missing_link() {
        assert_eq!(estimate_transfer_times(None, &job(0), HostId(0)).unwrap(), (0.0, 0.0));
        assert!(matches!(
            estimate_transfer_times(None, &job(0), HostId(1)),
            Err(EstimateError::NoLink { .. })
        ));
    }

    #[test]
    fn compute_energy_baselines() {
        let tab = snap(0, 0, 4.0, 4.5, 1.0, 1.0);
        let (_, ec, _) = estimate_energy(0.0, 4.0, 0.0, &tab, &tab).unwrap();
        assert_relative_eq!(ec, 18.0, max_relative = 1e-12);
        assert_relative_eq!(crate::model::joules_to_mwh(ec), 5.0, max_relative = 1e-12);

        let s7e = snap(0, 0, 5.4, 3.7, 1.0, 1.0);
        let (ei, ec, eo) = estimate_energy(0.0, 5.4, 0.0, &s7e, &s7e).unwrap();
        assert_relative_eq!(ec, 19.98, max_relative = 1e-12);
        assert!((crate::model::joules_to_mwh(ec) - 5.5).abs() < 0.06);
        assert_eq!((ei, eo), (0.0, 0.0));
    }

    #[test]
    fn local_single_host_estimate() {
        let view = View::new(HostId(0)).with_snapshot(snap(0, 0, 4.0, 4.5, 2.0, 1.5));
        let est = full_estimate(&job(0), HostId(0), &view, EstimateOptions::default()).unwrap();
        assert_eq!(est.total_time(), 4.0);
        assert_relative_eq!(est.total_energy(), 18.0, max_relative = 1e-12);
        assert_eq!((est.t_in, est.t_out, est.e_in, est.e_out), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn remote_and_local_differ_by_transfers() {
        let link = LinkEstimate::from_rates(HostId(0), HostId(1), 110e6, 110e6);
        let view = View::new(HostId(0))
            .with_snapshot(snap(0, 0, 4.0, 4.5, 2.0, 1.5))
            .with_snapshot(snap(1, 0, 4.0, 4.5, 2.0, 1.5))
            .with_link(link);
        let local = full_estimate(&job(0), HostId(0), &view, EstimateOptions::default()).unwrap();
        let remote = full_estimate(&job(0), HostId(1), &view, EstimateOptions::default()).unwrap();
        let diff = remote.total_time() - local.total_time();
        assert!((diff - (remote.t_in + remote.t_out)).abs() < 1e-12);
    }

    /// Hand-computed three-host fixture.
    #[test]
    fn three_host_fixture_matches_hand_computation() {
        // A (origin): TE 4.0 PC 4.5 PU 3.0 PD 2.1, n = 1
        // B: TE 2.9 PC 3.2 PU 2.6 PD 1.8, n = 0, link 210 up / 110 down Mbit/s
        // C: TE 1.5 PC 68 PU 30 PD 27.5, n = 2, link 119 up / 119 down Mbit/s
        let view = View::new(HostId(0))
            .with_snapshot(snap(0, 1, 4.0, 4.5, 3.0, 2.1))
            .with_snapshot(snap(1, 0, 2.9, 3.2, 2.6, 1.8))
            .with_snapshot(snap(2, 2, 1.5, 68.0, 30.0, 27.5))
            .with_link(LinkEstimate::from_rates(HostId(0), HostId(1), 210e6, 110e6))
            .with_link(LinkEstimate::from_rates(HostId(0), HostId(2), 119e6, 119e6));
        let spec = job(0);
        let o = EstimateOptions::default();

        let a = full_estimate(&spec, HostId(0), &view, o).unwrap();
        assert_relative_eq!(a.total_time(), 8.0, max_relative = 1e-12);
        assert_relative_eq!(a.total_energy(), 18.0, max_relative = 1e-12);

                let b = full_estimate(&spec, HostId(1), &view, o).unwrap();
        let ti_b = 17_600_000.0 / 210e6;
        let to_b = 32_768.0 / 110e6;
        assert_relative_eq!(b.total_time(), ti_b + 2.9 + to_b, max_relative = 1e-12);
        assert_relative_eq!(
            b.total_energy(),
            ti_b * (3.0 + 1.8) + 2.9 * 3.2 + to_b * (2.1 + 2.6),
            max_relative = 1e-12
        );
        assert_relative_eq!(b.total_time(), 2.984_107_414_718_614, max_relative = 1e-12);
        assert_relative_eq!(b.total_energy(), 9.683_685_801_558_441, max_relative = 1e-12);

        let c = full_estimate(&spec, HostId(2), &view, o).unwrap();
        let ti_c = 17_600_000.0 / 119e6;
        let to_c = 32_768.0 / 119e6;
        assert_relative_eq!(c.total_time(), ti_c + 4.5 + to_c, max_relative = 1e-12);
        assert_relative_eq!(
            c.total_energy(),
            ti_c * (3.0 + 27.5) + 1.5 * 68.0 + to_c * (2.1 + 30.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(c.total_time(), 4.648_174_521_008_404, max_relative = 1e-12);
        assert_relative_eq!(c.total_energy(), 106.519_763_468_907_56, max_relative = 1e-12);
    }

    #[test]
    fn missing_candidate_snapshot() {
        let view = View::new(HostId(0)).with_snapshot(snap(0, 0, 4.0, 4.5, 2.0, 1.5));
        assert!(full_estimate(&job(0), HostId(3), &view, EstimateOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn more_queued_jobs_means_longer_estimate(n in 0usize..50, te in 0.1f64..20.0, extra in 1usize..10) {
            let spec = job(0);
            let link = LinkEstimate::from_rates(HostId(0), HostId(1), 100e6, 100e6);
            let base = View::new(HostId(0)).with_snapshot(snap(0, 0, 3.0, 3.0, 2.0, 2.0)).with_link(link);
            let short = base.clone().with_snapshot(snap(1, n, te, 3.0, 2.0, 2.0));
            let long = base.with_snapshot(snap(1, n + extra, te, 3.0, 2.0, 2.0));
            let o = EstimateOptions::default();
            let ts = full_estimate(&spec, HostId(1), &short, o).unwrap().total_time();
            let tl = full_estimate(&spec, HostId(1), &long, o).unwrap().total_time();
            prop_assert!(tl > ts);
        }
    }
}
