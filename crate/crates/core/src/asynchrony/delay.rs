use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;

use super::trace::{Architecture, Trace, TraceEntry};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, stream_rng};

/// How long a requested gradient takes to come back.
///
/// Stochastic models are realized by a closed pool of `K` workers: each worker
/// holds one outstanding request, requests are delivered in order of their
/// nominal arrival time `t + d_t`, and a worker requests the current iterate
/// as soon as it delivers. Every request arrives exactly once.
///
/// With `K` requests always in flight the mean delay is about `K - 1`, so
/// delays growing with `n` can only affect a vanishing fraction of updates.
/// The growing models therefore make worker 0 a straggler and let the other
/// workers answer immediately; with `K = 1` they collapse to `s(n) = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayModel {
    None,
    /// `s(n) = max(0, n - d)`.
    Constant {
        d: usize,
    },
    /// `K` workers served cyclically: `s(n) = max(0, n - (K - 1))`.
    RoundRobin,
    /// Straggler delay uniform on `0..=k_coef * t^p`, `0 < p < 1`.
    Sublinear {
        p: f64,
        k_coef: f64,
    },
    /// Straggler delay uniform on `0..=k_coef * t`.
    Linear {
        k_coef: f64,
    },
    /// Straggler delay uniform on `0..=k_coef * t^q`, `q >= 1`.
    Polynomial {
        q: f64,
        k_coef: f64,
    },
    /// Worker 0 is a straggler whose request at `t` comes back after
    /// `ceil(rate * t)` plus a uniform jitter in `[0, t / 10]`; the other
    /// workers answer immediately.
    RandomLinear {
        rate: f64,
        jitter_seed: u64,
    },
}

impl DelayModel {
    pub fn name(&self) -> &'static str {
        match self {
            DelayModel::None => "none",
            DelayModel::Constant { .. } => "constant",
            DelayModel::RoundRobin => "round_robin",
            DelayModel::Sublinear { .. } => "sublinear",
            DelayModel::Linear { .. } => "linear",
            DelayModel::Polynomial { .. } => "polynomial",
            DelayModel::RandomLinear { .. } => "random_linear",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDelayModel(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            DelayModel::None | DelayModel::Constant { .. } | DelayModel::RoundRobin => Ok(()),
            DelayModel::Sublinear { p, k_coef } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidDelayModel("p must lie in (0,1)".into()));
                }
                positive("k_coef", k_coef)
            }
            DelayModel::Linear { k_coef } => positive("k_coef", k_coef),
            DelayModel::Polynomial { q, k_coef } => {
                if !(q >= 1.0 && q.is_finite()) {
                    return Err(Error::InvalidDelayModel("q must be at least 1".into()));
                }
                positive("k_coef", k_coef)
            }
            DelayModel::RandomLinear { rate, .. } => positive("rate", rate),
        }
    }

    /// Upper bound on the delay of a request issued at `t`, for the
    /// growth-class models.
    fn growth_bound(&self, t: usize) -> Option<u64> {
        let (k, e) = match *self {
            DelayModel::Sublinear { p, k_coef } => (k_coef, p),
            DelayModel::Linear { k_coef } => (k_coef, 1.0),
            DelayModel::Polynomial { q, k_coef } => (k_coef, q),
            _ => return None,
        };
        // `as` saturates, which is what we want for t^q overflowing u64.
        Some((k * (t as f64).powf(e)).floor() as u64)
    }
}

impl fmt::Display for DelayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DelayModel::None | DelayModel::RoundRobin => f.write_str(self.name()),
            DelayModel::Constant { d } => write!(f, "constant(D={d})"),
            DelayModel::Sublinear { p, k_coef } => write!(f, "sublinear(p={p}, k_coef={k_coef})"),
            DelayModel::Linear { k_coef } => write!(f, "linear(k_coef={k_coef})"),
            DelayModel::Polynomial { q, k_coef } => write!(f, "polynomial(q={q}, k_coef={k_coef})"),
            DelayModel::RandomLinear { rate, jitter_seed } => {
                write!(f, "random_linear(rate={rate}, jitter_seed={jitter_seed})")
            }
        }
    }
}

fn noise_seed(master_seed: u64, n: usize) -> u64 {
    derive_seed(master_seed, stream::NOISE, n as u64)
}

/// Generates the trace of `n_iter` iterations for `workers` workers.
pub fn gen_trace(
    model: DelayModel,
    arch: Architecture,
    workers: usize,
    n_iter: usize,
    master_seed: u64,
) -> Result<Trace> {
    model.validate()?;
    if workers == 0 {
        return Err(Error::InvalidDelayModel("worker count must be at least 1".into()));
    }
    if n_iter == 0 {
        return Err(Error::InvalidDelayModel("iteration count must be at least 1".into()));
    }
    let entry = |n: usize, source: usize| TraceEntry {
        n,
        source,
        noise_seed: noise_seed(master_seed, n),
    };
    let lagged = |lag: usize| (0..n_iter).map(|n| entry(n, n.saturating_sub(lag))).collect::<Vec<_>>();

    let entries = match model {
        DelayModel::None => lagged(0),
        DelayModel::RoundRobin => lagged(workers - 1),
        DelayModel::Constant { d } => {
            if arch == Architecture::SharedMemory && d >= workers {
                return Err(Error::InvalidDelayModel(format!(
                    "constant delay {d} reads the initial iterate {} times, more than K={workers}",
                    d + 1
                )));
            }
            lagged(d)
        }
        DelayModel::RandomLinear { rate, jitter_seed } => {
            let mut rng = stream_rng(master_seed, stream::DELAY, jitter_seed);
            pool(workers, n_iter, |t, worker| {
                if worker != 0 {
                    return 0;
                }
                let base = (rate * t as f64).ceil() as u64;
                base.saturating_add(rng.random_range(0..=(t as u64 / 10)))
            })
            .into_iter()
            .enumerate()
            .map(|(n, s)| entry(n, s))
            .collect()
        }
        DelayModel::Sublinear { .. } | DelayModel::Linear { .. } | DelayModel::Polynomial { .. } => {
            let mut rng = stream_rng(master_seed, stream::DELAY, 0);
            // Lateness from queueing behind other workers is at most K-1.
            let slack = workers as u64 - 1;
            pool(workers, n_iter, |t, worker| {
                if worker != 0 {
                    return 0;
                }
                let bound = model.growth_bound(t).unwrap_or(0);
                let cap = bound.saturating_sub(slack);
                if cap == 0 {
                    0
                } else {
                    rng.random_range(0..=cap)
                }
            })
            .into_iter()
            .enumerate()
            .map(|(n, s)| entry(n, s))
            .collect()
        }
    };
    Ok(Trace::new(arch, workers, entries))
}

/// Closed pool of `workers` workers. `nominal(t, worker)` is the delay of the
/// request issued at iteration `t`. Returns `s(n)` for each `n`.
fn pool(workers: usize, n_iter: usize, mut nominal: impl FnMut(usize, usize) -> u64) -> Vec<usize> {
    let mut pending = BinaryHeap::with_capacity(workers);
    for w in 0..workers {
        pending.push(Reverse((nominal(0, w), 0usize, w)));
    }
    let mut sources = Vec::with_capacity(n_iter);
    for n in 0..n_iter {
        let Reverse((_, source, worker)) = pending.pop().expect("pool never empties");
        sources.push(source);
        let t = n + 1;
        if t < n_iter {
            let key = (t as u64).saturating_add(nominal(t, worker));
            pending.push(Reverse((key, t, worker)));
        }
    }
    sources
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asynchrony::validate_trace;

    fn sources(t: &Trace) -> Vec<usize> {
        t.sources().collect()
    }

    #[test]
    fn no_delay() {
        let t = gen_trace(DelayModel::None, Architecture::MasterWorker, 3, 5, 1).unwrap();
        assert_eq!(sources(&t), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn round_robin_warm_up() {
        let t = gen_trace(DelayModel::RoundRobin, Architecture::MasterWorker, 4, 8, 1).unwrap();
        assert_eq!(sources(&t), vec![0, 0, 0, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn constant_delay() {
        let t = gen_trace(DelayModel::Constant { d: 2 }, Architecture::SharedMemory, 3, 6, 0).unwrap();
        assert_eq!(sources(&t), vec![0, 0, 0, 1, 2, 3]);
        assert!(validate_trace(&t).is_ok());
        assert!(gen_trace(DelayModel::Constant { d: 3 }, Architecture::SharedMemory, 3, 6, 0).is_err());
    }

    #[test]
    fn rejects_out_of_class_parameters() {
        let err = gen_trace(
            DelayModel::Sublinear { p: 1.5, k_coef: 1.0 },
            Architecture::MasterWorker,
            2,
            10,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("p must lie in (0,1)"));
        assert!(DelayModel::Polynomial { q: 0.5, k_coef: 1.0 }.validate().is_err());
        assert!(DelayModel::Linear { k_coef: 0.0 }.validate().is_err());
        assert!(DelayModel::RandomLinear {
            rate: f64::NAN,
            jitter_seed: 0
        }
        .validate()
        .is_err());
        assert!(gen_trace(DelayModel::None, Architecture::MasterWorker, 0, 10, 0).is_err());
        assert!(gen_trace(DelayModel::None, Architecture::MasterWorker, 1, 0, 0).is_err());
    }

    #[test]
    fn linear_sources_keep_up() {
        for k in 1..=3 {
            for seed in 0..20 {
                let t = gen_trace(
                    DelayModel::Linear { k_coef: 1.0 },
                    Architecture::MasterWorker,
                    k,
                    2000,
                    seed,
                )
                .unwrap();
                for e in &t.entries {
                    assert!(
                        e.source as f64 >= e.n as f64 / 2.0 - 1.0,
                        "k={k} n={} s={}",
                        e.n,
                        e.source
                    );
                }
            }
        }
    }

    #[test]
    fn growth_bounds_hold() {
        let k = 4;
        let model = DelayModel::Sublinear { p: 0.5, k_coef: 3.0 };
        let t = gen_trace(model, Architecture::MasterWorker, k, 5000, 9).unwrap();
        for e in &t.entries {
            let bound = (3.0 * (e.source as f64).sqrt()).floor() as usize;
            assert!(e.delay() <= bound.max(k - 1), "n={} s={}", e.n, e.source);
        }
    }

    #[test]
    fn random_linear_grows_linearly() {
        let model = DelayModel::RandomLinear {
            rate: 0.5,
            jitter_seed: 3,
        };
        let t = gen_trace(model, Architecture::MasterWorker, 4, 100_000, 2).unwrap();
        assert!(validate_trace(&t).is_ok());
        // The straggler's gradients come back with delay at least rate * s.
        let late: Vec<_> = t.entries.iter().filter(|e| e.delay() >= 4).collect();
        assert!(late.len() >= 10);
        for e in late {
            assert!(e.delay() as f64 >= 0.5 * e.source as f64);
        }
        assert!(t.max_delay() > 10_000);
    }

    #[test]
    fn linear_delays_reach_their_bound() {
        let t = gen_trace(
            DelayModel::Linear { k_coef: 1.0 },
            Architecture::MasterWorker,
            4,
            100_000,
            6,
        )
        .unwrap();
        assert!(t.max_delay() > 10_000);
    }

    #[test]
    fn seeds_are_shared_across_models() {
        let a = gen_trace(DelayModel::None, Architecture::MasterWorker, 2, 50, 5).unwrap();
        let b = gen_trace(DelayModel::Linear { k_coef: 2.0 }, Architecture::MasterWorker, 2, 50, 5).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.noise_seed, y.noise_seed);
        }
    }

    #[test]
    fn deterministic() {
        let m = DelayModel::Polynomial { q: 2.0, k_coef: 1.0 };
        let a = gen_trace(m, Architecture::MasterWorker, 4, 1000, 17).unwrap();
        let b = gen_trace(m, Architecture::MasterWorker, 4, 1000, 17).unwrap();
        assert_eq!(a, b);
    }
}
