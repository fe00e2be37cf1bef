use std::collections::HashMap;
use std::time::Instant;

use super::{out_of_bounds, Metrics, RunConfig, RunResult};
use crate::asynchrony::validate_trace;
use crate::error::{check_dim, Error, Result};
use crate::geometry::SetKind;

/// Deterministic delayed gradient descent: exact gradients only.
pub fn run_dagd(cfg: &RunConfig) -> Result<RunResult> {
    if !cfg.noise.is_none() {
        return Err(Error::InvalidRun("deterministic runs require noise = none".into()));
    }
    run(cfg)
}

/// Delayed SGD without constraints.
pub fn run_dasgd_unconstrained(cfg: &RunConfig) -> Result<RunResult> {
    if !matches!(cfg.set.kind(), SetKind::AllSpace) {
        return Err(Error::InvalidRun(
            "unconstrained runs require the whole space; use run_dasgd_projected".into(),
        ));
    }
    run(cfg)
}

/// Delayed SGD with lazy projection onto a compact set.
pub fn run_dasgd_projected(cfg: &RunConfig) -> Result<RunResult> {
    if !cfg.set.is_compact() {
        return Err(Error::InvalidRun(
            "projected runs require a compact feasible set".into(),
        ));
    }
    run(cfg)
}

fn check_config(cfg: &RunConfig) -> Result<()> {
    let d = cfg.objective.dim();
    check_dim(d, cfg.y0.len())?;
    check_dim(d, cfg.set.dim())?;
    if cfg.record_every == 0 {
        return Err(Error::InvalidRun("record_every must be at least 1".into()));
    }
    if cfg.y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidRun("initial point is not finite".into()));
    }
    let report = validate_trace(&cfg.trace);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidRun(format!(
            "trace fails validation ({} violations, first: {v})",
            report.violations.len()
        )));
    }
    Ok(())
}

/// The common recursion behind every logical runner; accepts any set and
/// noise model.
pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    check_config(cfg)?;
    let start = Instant::now();
    let obj = cfg.objective.as_ref();
    let d = obj.dim();
    let entries = &cfg.trace.entries;
    let n_iter = entries.len();
    let metrics = Metrics::new(obj, &cfg.set);

    // Mean gradients at past iterates, kept until their last use as a source.
    let mut remaining = vec![0u32; n_iter];
    for e in entries {
        remaining[e.source] += 1;
    }
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();

    let mut y = cfg.y0.clone();
    let mut x = vec![0.0; d];
    let mut grad_x = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut series = Vec::with_capacity(n_iter / cfg.record_every + 1);
    let mut iterates = cfg.record_iterates.then(Vec::new);
    let mut diverged = None;

    for e in entries {
        let n = e.n;
        cfg.set.project_into(&y, &mut x);
        let record = n % cfg.record_every == 0;
        let needed_later = remaining[n] > 0;
        if needed_later || record {
            obj.gradient_into(&x, &mut grad_x);
            if grad_x.iter().any(|g| !g.is_finite()) {
                diverged = Some(n);
                break;
            }
            if needed_later {
                cache.insert(n, grad_x.clone());
            }
        }
        let alpha = cfg.schedule.step(n as u64 + 1);
        let src_grad = if remaining[e.source] == 1 {
            cache.remove(&e.source)
        } else {
            cache.get(&e.source).cloned()
        }
        .expect("source gradient is cached until its last use");
        remaining[e.source] -= 1;

        if record {
            series.push(metrics.point(n, alpha, e.source, &x, &y, &grad_x, &src_grad));
            if let Some(it) = iterates.as_mut() {
                it.push(x.clone());
            }
        }

        step.copy_from_slice(&src_grad);
        cfg.noise.perturb(&mut step, e.noise_seed);
        for (yi, gi) in y.iter_mut().zip(&step) {
            *yi -= alpha * gi;
        }
        if out_of_bounds(&y) {
            diverged = Some(n + 1);
            break;
        }
    }

    if diverged.is_none() {
        cfg.set.project_into(&y, &mut x);
    }
    Ok(RunResult {
        series,
        iterates,
        record_every: cfg.record_every,
        final_x: x,
        final_y: y,
        trace: cfg.trace.clone(),
        diverged,
        wall_time: start.elapsed(),
    })
}
