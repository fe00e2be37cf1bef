use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use super::{out_of_bounds, Metrics, RecordPoint, RunResult};
use crate::asynchrony::{Architecture, StepSchedule, Trace, TraceEntry};
use crate::error::{check_dim, Error, Result};
use crate::geometry::FeasibleSet;
use crate::objectives::{NoiseModel, Objective};
use crate::rng::{derive_seed, stream};

#[derive(Clone)]
pub struct ThreadedConfig {
    pub objective: Arc<dyn Objective>,
    pub noise: NoiseModel,
    pub set: FeasibleSet,
    pub schedule: StepSchedule,
    pub workers: usize,
    pub iterations: usize,
    pub master_seed: u64,
    pub y0: Vec<f64>,
    pub record_every: usize,
}

struct Shared {
    y: Vec<f64>,
    n: usize,
    next_request: u64,
    entries: Vec<TraceEntry>,
    series: Vec<RecordPoint>,
    diverged: Option<usize>,
}

fn lock(m: &Mutex<Shared>) -> MutexGuard<'_, Shared> {
    // A panicking worker poisons the lock; the others still need to stop cleanly.
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Shared-memory execution with real threads.
///
/// Each of `workers` threads repeatedly snapshots `(Y, n)`, computes a
/// stochastic gradient at `Π(Y)` outside the lock, then applies it under the
/// lock as update number `n'` (the current counter) and records
/// `(n', n, seed)`. The recorded trace replays the run exactly through the
/// logical runner.
pub fn run_threaded(cfg: &ThreadedConfig) -> Result<(RunResult, Trace)> {
    let obj = cfg.objective.as_ref();
    let d = obj.dim();
    check_dim(d, cfg.y0.len())?;
    check_dim(d, cfg.set.dim())?;
    if cfg.workers == 0 {
        return Err(Error::InvalidRun("worker count must be at least 1".into()));
    }
    if cfg.record_every == 0 {
        return Err(Error::InvalidRun("record_every must be at least 1".into()));
    }
    let start = Instant::now();
    let metrics = Metrics::new(obj, &cfg.set);
    let shared = Mutex::new(Shared {
        y: cfg.y0.clone(),
        n: 0,
        next_request: 0,
        entries: Vec::with_capacity(cfg.iterations),
        series: Vec::new(),
        diverged: None,
    });

    let worker = || {
        let mut x_read = vec![0.0; d];
        let mut g_read = vec![0.0; d];
        let mut x_now = vec![0.0; d];
        let mut g_now = vec![0.0; d];
        loop {
            let (n_read, request) = {
                let mut s = lock(&shared);
                if s.n >= cfg.iterations || s.diverged.is_some() {
                    return;
                }
                cfg.set.project_into(&s.y, &mut x_read);
                let r = s.next_request;
                s.next_request += 1;
                (s.n, r)
            };
            let seed = derive_seed(cfg.master_seed, stream::THREADED, request);
            // Let other workers apply their updates while this gradient is in
            // flight; otherwise a single core runs each cycle without overlap.
            std::thread::yield_now();
            obj.gradient_into(&x_read, &mut g_read);
            let mut step = g_read.clone();
            cfg.noise.perturb(&mut step, seed);

            let mut s = lock(&shared);
            if s.n >= cfg.iterations || s.diverged.is_some() {
                return;
            }
            let n = s.n;
            let alpha = cfg.schedule.step(n as u64 + 1);
            if n.is_multiple_of(cfg.record_every) {
                cfg.set.project_into(&s.y, &mut x_now);
                obj.gradient_into(&x_now, &mut g_now);
                let p = metrics.point(n, alpha, n_read, &x_now, &s.y, &g_now, &g_read);
                s.series.push(p);
            }
            for (yi, gi) in s.y.iter_mut().zip(&step) {
                *yi -= alpha * gi;
            }
            s.entries.push(TraceEntry {
                n,
                source: n_read,
                noise_seed: seed,
            });
            s.n += 1;
            if out_of_bounds(&s.y) {
                s.diverged = Some(n + 1);
            }
        }
    };

    let failed = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|_| scope.spawn(|| catch_unwind(AssertUnwindSafe(worker)).is_err()))
            .collect();
        // Threads left unjoined by the short circuit are joined by the scope.
        handles.into_iter().any(|h| h.join().unwrap_or(true))
    });

    let s = shared.into_inner().unwrap_or_else(|e| e.into_inner());
    let trace = Trace::new(Architecture::SharedMemory, cfg.workers, s.entries);
    if failed {
        return Err(Error::WorkerFailed {
            partial_trace: Box::new(trace),
        });
    }
    let mut series = s.series;
    series.sort_by_key(|p| p.n);
    let mut final_x = vec![0.0; d];
    cfg.set.project_into(&s.y, &mut final_x);
    let result = RunResult {
        series,
        iterates: None,
        record_every: cfg.record_every,
        final_x,
        final_y: s.y,
        trace: Arc::new(trace.clone()),
        diverged: s.diverged,
        wall_time: start.elapsed(),
    };
    Ok((result, trace))
}
