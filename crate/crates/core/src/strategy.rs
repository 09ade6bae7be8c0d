//! Offloading strategies: pure functions from a job and per-host estimates
//! to an executor.
//!
//! Every argmin breaks ties by the lowest [`HostId`].

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{CostEstimate, HostId, JobSpec};

/// What to do when no host is expected to meet the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackPolicy {
    /// Run wherever the job is expected to finish first.
    #[default]
    #[serde(alias = "use-tmin", alias = "usetmin")]
    Tmin,
    Cancel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Always run at the origin.
    Local,
    /// Always run on a fixed server.
    Server(HostId),
    /// Minimum estimated completion time.
    TMin,
    /// Minimum estimated energy, deadline ignored.
    EMin,
    /// Minimum estimated energy among hosts expected to meet the deadline.
    Hybrid(FallbackPolicy),
    /// Uniformly random host among those expected to meet the deadline.
    Balanced(FallbackPolicy),
    /// Run locally if the origin is expected to meet the deadline, else defer.
    LocalFirst(Box<Strategy>),
}

impl Strategy {
    /// Resolves a scenario strategy name. `server` needs the server host.
    pub fn from_name(
        name: &str,
        fallback: FallbackPolicy,
        server: Option<HostId>,
    ) -> Result<Strategy, ConfigError> {
        let name = name.trim().to_ascii_lowercase();
        if let Some(inner) = name.strip_prefix("lf:") {
            let inner = match inner {
                "tmin" => Strategy::TMin,
                "hybrid" => Strategy::Hybrid(fallback),
                "balanced" => Strategy::Balanced(fallback),
                _ => return Err(ConfigError::UnknownStrategy(name)),
            };
            return Ok(Strategy::LocalFirst(Box::new(inner)));
        }
        Ok(match name.as_str() {
            "local" => Strategy::Local,
            "server" => match server {
                Some(h) => Strategy::Server(h),
                None => {
                    return Err(ConfigError::Invalid(vec![
                        "strategy `server` needs `server_host`".into(),
                    ]))
                }
            },
            "tmin" => Strategy::TMin,
            "emin" => Strategy::EMin,
            "hybrid" => Strategy::Hybrid(fallback),
            "balanced" => Strategy::Balanced(fallback),
            _ => return Err(ConfigError::UnknownStrategy(name)),
        })
    }

    /// Canonical scenario name (`lf:hybrid`, `server`, ...).
    pub fn name(&self) -> String {
        match self {
            Strategy::Local => "local".into(),
            Strategy::Server(_) => "server".into(),
            Strategy::TMin => "tmin".into(),
            Strategy::EMin => "emin".into(),
            Strategy::Hybrid(_) => "hybrid".into(),
            Strategy::Balanced(_) => "balanced".into(),
            Strategy::LocalFirst(inner) => format!("lf:{}", inner.name()),
        }
    }

    pub fn is_local_first(&self) -> bool {
        matches!(self, Strategy::LocalFirst(_))
    }

    /// Whether the strategy only makes sense when origins also execute jobs.
    pub fn needs_local_worker(&self) -> bool {
        matches!(self, Strategy::Local | Strategy::LocalFirst(_))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Estimated cost of running the job on one worker host.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub host: HostId,
    pub estimate: CostEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// `None` when the job is cancelled.
    pub executor: Option<HostId>,
    pub estimate: Option<CostEstimate>,
    /// Hosts with estimated total time within the deadline, ascending.
    pub feasible: Vec<HostId>,
}

impl Decision {
    pub fn is_cancelled(&self) -> bool {
        self.executor.is_none()
    }
}

/// Hosts expected to finish within the job's relative deadline, ascending.
pub fn feasible_set(spec: &JobSpec, candidates: &[Candidate]) -> Vec<HostId> {
    let mut hosts: Vec<HostId> = candidates
        .iter()
        .filter(|c| c.estimate.total_time() <= spec.relative_deadline)
        .map(|c| c.host)
        .collect();
    hosts.sort_unstable();
    hosts
}

fn argmin_by<'a, F>(candidates: impl IntoIterator<Item = &'a Candidate>, key: F) -> Option<&'a Candidate>
where
    F: Fn(&CostEstimate) -> f64,
{
    candidates.into_iter().min_by(|a, b| {
        key(&a.estimate)
            .total_cmp(&key(&b.estimate))
            .then_with(|| a.host.cmp(&b.host))
    })
}

fn fastest(candidates: &[Candidate]) -> Option<&Candidate> {
    argmin_by(candidates, CostEstimate::total_time)
}

fn pick(c: Option<&Candidate>) -> (Option<HostId>, Option<CostEstimate>) {
    (c.map(|c| c.host), c.map(|c| c.estimate))
}

fn fallback(policy: FallbackPolicy, candidates: &[Candidate]) -> (Option<HostId>, Option<CostEstimate>) {
    match policy {
        FallbackPolicy::Tmin => pick(fastest(candidates)),
        FallbackPolicy::Cancel => (None, None),
    }
}

fn find(candidates: &[Candidate], host: HostId) -> Option<&Candidate> {
    candidates.iter().find(|c| c.host == host)
}

/// Picks the executor for `spec`.
///
/// `candidates` holds one estimate per worker host as seen from the origin
/// at decision time. `rng` is only drawn from by [`Strategy::Balanced`], and
/// only when the feasible set is non-empty.
pub fn decide<R: Rng + ?Sized>(
    strategy: &Strategy,
    spec: &JobSpec,
    candidates: &[Candidate],
    rng: &mut R,
) -> Decision {
    let feasible = feasible_set(spec, candidates);
    let (executor, estimate) = match strategy {
        Strategy::Local => (Some(spec.origin), find(candidates, spec.origin).map(|c| c.estimate)),
        Strategy::Server(server) => (Some(*server), find(candidates, *server).map(|c| c.estimate)),
        Strategy::TMin => pick(fastest(candidates)),
        Strategy::EMin => pick(argmin_by(candidates, CostEstimate::total_energy)),
        Strategy::Hybrid(policy) => {
            let within = candidates.iter().filter(|c| feasible.binary_search(&c.host).is_ok());
            match argmin_by(within, CostEstimate::total_energy) {
                Some(c) => pick(Some(c)),
                None => fallback(*policy, candidates),
            }
        }
        Strategy::Balanced(policy) => {
            if feasible.is_empty() {
                fallback(*policy, candidates)
            } else {
                let host = feasible[rng.random_range(0..feasible.len())];
                (Some(host), find(candidates, host).map(|c| c.estimate))
            }
        }
        Strategy::LocalFirst(inner) => match find(candidates, spec.origin) {
            Some(local) if local.estimate.total_time() <= spec.relative_deadline => {
                (Some(spec.origin), Some(local.estimate))
            }
            _ => {
                let d = decide(inner, spec, candidates, rng);
                (d.executor, d.estimate)
            }
        },
    };
    Decision {
        executor,
        estimate,
        feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cand(host: u32, t: f64, e: f64) -> Candidate {
        Candidate {
            host: HostId(host),
            estimate: CostEstimate {
                t_compute: t,
                e_compute: e,
                ..CostEstimate::default()
            },
        }
    }

    fn job(d: f64) -> JobSpec {
        JobSpec::new(0, HostId(0), 0.0, d, 1, 0).unwrap()
    }

    /// h0 origin; h1 server; h2 fastest; h3 cheapest but late; h4 cheapest
    /// among the rest.
    fn illustration() -> Vec<Candidate> {
        vec![
            cand(0, 7.0, 9.0),
            cand(1, 6.0, 8.0),
            cand(2, 2.0, 7.0),
            cand(3, 12.0, 1.0),
            cand(4, 5.0, 3.0),
        ]
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn illustration_fixture() {
        let c = illustration();
        let j = job(9.0);
        let mut r = rng();
        assert_eq!(decide(&Strategy::Local, &j, &c, &mut r).executor, Some(HostId(0)));
        assert_eq!(decide(&Strategy::Server(HostId(1)), &j, &c, &mut r).executor, Some(HostId(1)));
        assert_eq!(decide(&Strategy::TMin, &j, &c, &mut r).executor, Some(HostId(2)));
        assert_eq!(decide(&Strategy::EMin, &j, &c, &mut r).executor, Some(HostId(3)));
        let hybrid = decide(&Strategy::Hybrid(FallbackPolicy::Tmin), &j, &c, &mut r);
        assert_eq!(hybrid.executor, Some(HostId(4)));
        assert_eq!(hybrid.feasible, vec![HostId(0), HostId(1), HostId(2), HostId(4)]);
    }

    #[test]
    fn single_host_view_runs_locally() {
        let c = vec![cand(0, 20.0, 5.0)];
        let j = job(3.0);
        let mut r = rng();
        for s in [
            Strategy::Local,
            Strategy::TMin,
            Strategy::EMin,
            Strategy::Hybrid(FallbackPolicy::Tmin),
            Strategy::Balanced(FallbackPolicy::Tmin),
            Strategy::LocalFirst(Box::new(Strategy::TMin)),
        ] {
            assert_eq!(decide(&s, &j, &c, &mut r).executor, Some(HostId(0)), "{s}");
        }
    }

    #[test]
    fn hybrid_fallbacks() {
        let c = illustration();
        let tight = job(1.0);
        let mut r = rng();
        let d = decide(&Strategy::Hybrid(FallbackPolicy::Tmin), &tight, &c, &mut r);
        assert!(d.feasible.is_empty());
        assert_eq!(d.executor, Some(HostId(2)));
        let d = decide(&Strategy::Hybrid(FallbackPolicy::Cancel), &tight, &c, &mut r);
        assert!(d.is_cancelled());
        assert!(d.estimate.is_none());
        let d = decide(&Strategy::Balanced(FallbackPolicy::Cancel), &tight, &c, &mut r);
        assert!(d.is_cancelled());
    }

    #[test]
    fn ties_go_to_lowest_host() {
        let c = vec![cand(3, 2.0, 1.0), cand(1, 2.0, 1.0), cand(2, 2.0, 1.0)];
        let mut r = rng();
        assert_eq!(decide(&Strategy::TMin, &job(9.0), &c, &mut r).executor, Some(HostId(1)));
        assert_eq!(decide(&Strategy::EMin, &job(9.0), &c, &mut r).executor, Some(HostId(1)));
    }

    #[test]
    fn local_first_prefers_origin_then_defers() {
        let c = illustration();
        let mut r = rng();
        let lf = Strategy::LocalFirst(Box::new(Strategy::TMin));
        assert_eq!(decide(&lf, &job(9.0), &c, &mut r).executor, Some(HostId(0)));
        assert_eq!(decide(&lf, &job(6.5), &c, &mut r).executor, Some(HostId(2)));
    }

    #[test]
    fn balanced_stays_in_feasible_set() {
        let c = illustration();
        let mut r = rng();
        let s = Strategy::Balanced(FallbackPolicy::Tmin);
        for _ in 0..200 {
            let d = decide(&s, &job(9.0), &c, &mut r);
            assert!(d.feasible.contains(&d.executor.unwrap()));
        }
    }

    #[test]
    fn names_round_trip() {
        for name in ["local", "tmin", "emin", "hybrid", "balanced", "lf:tmin", "lf:hybrid", "lf:balanced"] {
            let s = Strategy::from_name(name, FallbackPolicy::Tmin, None).unwrap();
            assert_eq!(s.name(), name);
        }
        let s = Strategy::from_name("server", FallbackPolicy::Tmin, Some(HostId(5))).unwrap();
        assert_eq!(s, Strategy::Server(HostId(5)));
        assert!(Strategy::from_name("server", FallbackPolicy::Tmin, None).is_err());
        assert!(matches!(
            Strategy::from_name("fastest", FallbackPolicy::Tmin, None),
            Err(ConfigError::UnknownStrategy(_))
        ));
        assert!(Strategy::from_name("lf:emin", FallbackPolicy::Tmin, None).is_err());
    }
}
