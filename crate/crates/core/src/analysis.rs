//! Post-processing of run results: ergodic averages, summability diagnostics
//! and ensemble statistics.

use std::fmt;
use std::str::FromStr;

use crate::asynchrony::StepSchedule;
use crate::engine::{RecordPoint, RunResult};
use crate::error::{Error, Result};

/// Early iterations excluded from slope fits and constant estimates.
pub const BURN_IN: usize = 100;

/// Least-squares slope of `ln y` against `ln x`, over the points where both
/// are positive. Returns 0 when fewer than two such points exist.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// [`loglog_slope`] restricted to `x >= max(x) / 10`.
pub fn last_decade_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let top = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (x, y): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, _)| **x >= top / 10.0)
        .map(|(x, y)| (*x, *y))
        .unzip();
    loglog_slope(&x, &y)
}

/// About `count` distinct indices in `0..len`, evenly spaced in `ln(i + 1)`
/// and always including the last one.
pub fn log_spaced_indices(len: usize, count: usize) -> Vec<usize> {
    if len == 0 || count == 0 {
        return Vec::new();
    }
    let top = (len as f64).ln();
    let mut out: Vec<usize> = (0..count)
        .map(|j| {
            let t = if count == 1 { 1.0 } else { j as f64 / (count - 1) as f64 };
            ((t * top).exp().round() as usize).clamp(1, len) - 1
        })
        .collect();
    out.push(len - 1);
    out.sort_unstable();
    out.dedup();
    out
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// `Σ_{k=a}^{b} α_k`, with `α_0 = 0`.
fn step_sum(schedule: &StepSchedule, a: usize, b: usize) -> f64 {
    (a.max(1)..=b).map(|k| schedule.step(k as u64)).sum()
}

/// Last iteration covered by the record at index `i` of a series.
fn block_end(series: &[RecordPoint], i: usize, record_every: usize, horizon: usize) -> usize {
    let next = series.get(i + 1).map_or(series[i].n + record_every, |p| p.n);
    next.min(horizon).max(series[i].n + 1) - 1
}

/// Running averages `X̄_n = Σ α_k X_k / Σ α_k` at each record point.
///
/// `X_0` carries no step and is skipped, so the first average is `X_1`. With
/// subsampled records each stored iterate stands for its whole block and is
/// weighted by the block's step sum.
pub fn ergodic_average(result: &RunResult, schedule: &StepSchedule) -> Result<Vec<(usize, Vec<f64>)>> {
    let iterates = result
        .iterates
        .as_ref()
        .ok_or_else(|| Error::Analysis("run did not record iterates".into()))?;
    if iterates.is_empty() {
        return Err(Error::Analysis("empty series".into()));
    }
    let horizon = result.trace.len();
    let d = iterates[0].len();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    let mut out = Vec::with_capacity(iterates.len());
    for (i, (p, x)) in result.series.iter().zip(iterates).enumerate() {
        let w = step_sum(
            schedule,
            p.n,
            block_end(&result.series, i, result.record_every, horizon),
        );
        if w == 0.0 {
            continue;
        }
        den += w;
        for (a, xi) in num.iter_mut().zip(x) {
            *a += w * xi;
        }
        out.push((p.n, num.iter().map(|a| a / den).collect()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailSum {
    pub ns: Vec<usize>,
    /// Partial sums of `α_{n+1} ‖∇f(X_n)‖²` up to and including each block.
    pub partial: Vec<f64>,
    /// Last-decade log-log growth slope of the partial sums.
    pub slope: f64,
}

fn tail_sum_of(ns: &[usize], grad_sq: &[f64], schedule: &StepSchedule, record_every: usize, horizon: usize) -> TailSum {
    let mut partial = Vec::with_capacity(ns.len());
    let mut acc = 0.0;
    for (i, (&n, g)) in ns.iter().zip(grad_sq).enumerate() {
        let next = ns
            .get(i + 1)
            .copied()
            .unwrap_or(n + record_every)
            .min(horizon)
            .max(n + 1);
        acc += step_sum(schedule, n + 1, next) * g;
        partial.push(acc);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n + 1) as f64).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&partial)
        .filter(|(x, _)| **x > BURN_IN as f64)
        .map(|(x, y)| (*x, *y))
        .unzip();
    TailSum {
        ns: ns.to_vec(),
        slope: last_decade_slope(&x, &y),
        partial,
    }
}

/// Weighted tail sum of one run.
pub fn weighted_tail_sum(result: &RunResult, schedule: &StepSchedule) -> TailSum {
    let ns: Vec<usize> = result.series.iter().map(|p| p.n).collect();
    let g: Vec<f64> = result.series.iter().map(|p| p.grad_norm_sq).collect();
    tail_sum_of(&ns, &g, schedule, result.record_every, result.trace.len())
}

/// Weighted tail sum of the ensemble mean of `‖∇f(X_n)‖²`.
pub fn ensemble_tail_sum(results: &[RunResult], schedule: &StepSchedule) -> Result<TailSum> {
    let summary = aggregate(results, Metric::GradNormSq)?;
    Ok(tail_sum_of(
        &summary.ns,
        &summary.mean,
        schedule,
        results[0].record_every,
        results[0].trace.len(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffRatio {
    /// Left endpoints `n` of consecutive record pairs.
    pub ns: Vec<usize>,
    /// `|m_{n'} − m_n| / Σ_{k=n+1}^{n'} α_k` for consecutive records `n < n'`.
    pub ratios: Vec<f64>,
    /// Maximum ratio with `n >= BURN_IN`; the estimate of the constant.
    pub max_after_burn_in: f64,
}

/// Successive differences of the ensemble mean of `‖∇f(X_n)‖²`, scaled by
/// the steps in between.
pub fn successive_diff_ratio(results: &[RunResult], schedule: &StepSchedule) -> Result<DiffRatio> {
    let summary = aggregate(results, Metric::GradNormSq)?;
    let m = &summary.mean;
    let mut ns = Vec::new();
    let mut ratios = Vec::new();
    for i in 1..m.len() {
        let (a, b) = (summary.ns[i - 1], summary.ns[i]);
        ns.push(a);
        ratios.push((m[i] - m[i - 1]).abs() / step_sum(schedule, a + 1, b));
    }
    let max_after_burn_in = ns
        .iter()
        .zip(&ratios)
        .filter(|(n, _)| **n >= BURN_IN)
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    Ok(DiffRatio {
        ns,
        ratios,
        max_after_burn_in,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    FValue,
    GradNormSq,
    Energy,
    DistToOpt,
    BNorm,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::FValue,
        Metric::GradNormSq,
        Metric::Energy,
        Metric::DistToOpt,
        Metric::BNorm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::FValue => "f_value",
            Metric::GradNormSq => "grad_norm_sq",
            Metric::Energy => "energy",
            Metric::DistToOpt => "dist_to_opt",
            Metric::BNorm => "b_n_norm",
        }
    }

    pub fn of(self, p: &RecordPoint) -> Option<f64> {
        match self {
            Metric::FValue => Some(p.f_value),
            Metric::GradNormSq => Some(p.grad_norm_sq),
            Metric::Energy => p.energy,
            Metric::DistToOpt => p.dist_to_opt,
            Metric::BNorm => Some(p.b_norm),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

/// Pointwise statistics of one metric across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub metric: Metric,
    pub replications: usize,
    pub ns: Vec<usize>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn aggregate(results: &[RunResult], metric: Metric) -> Result<EnsembleSummary> {
    let first = results
        .first()
        .ok_or_else(|| Error::Analysis("no results to aggregate".into()))?;
    let ns: Vec<usize> = first.series.iter().map(|p| p.n).collect();
    for (i, r) in results.iter().enumerate() {
        if r.series.len() != ns.len() || r.series.iter().zip(&ns).any(|(p, n)| p.n != *n) {
            return Err(Error::Analysis(format!(
                "replication {i} is recorded on a different iteration grid"
            )));
        }
    }
    let s = results.len();
    let mut out = EnsembleSummary {
        metric,
        replications: s,
        ns: ns.clone(),
        mean: Vec::with_capacity(ns.len()),
        median: Vec::with_capacity(ns.len()),
        min: Vec::with_capacity(ns.len()),
        max: Vec::with_capacity(ns.len()),
    };
    let mut column = Vec::with_capacity(s);
    for (j, n) in ns.iter().enumerate() {
        column.clear();
        for r in results {
            let v = metric
                .of(&r.series[j])
                .ok_or_else(|| Error::Analysis(format!("metric {metric} is not recorded (at n = {n})")))?;
            column.push(v);
        }
        out.mean.push(column.iter().sum::<f64>() / s as f64);
        out.median.push(median(&mut column));
        // `column` is sorted now.
        out.min.push(column[0]);
        out.max.push(column[s - 1]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDecay {
    /// Median of `‖b_n‖` over `BURN_IN <= n < 10 * BURN_IN`.
    pub early_median: f64,
    /// Median over the last decade `N/10 <= n < N`.
    pub late_median: f64,
}

impl DriftDecay {
    pub fn ratio(&self) -> f64 {
        self.early_median / self.late_median
    }
}

/// Decay of the recorded drift norms between the first and last decades.
///
/// Only records with a stale gradient (`s(n) < n`) enter the medians: a fresh
/// gradient has `b_n = 0` by definition, and under heavy-tailed delays those
/// records can make up most of a decade.
pub fn drift_decay(result: &RunResult) -> Result<DriftDecay> {
    let horizon = result.trace.len();
    if horizon < 100 * BURN_IN {
        return Err(Error::Analysis(format!(
            "drift decay needs at least {} iterations, got {horizon}",
            100 * BURN_IN
        )));
    }
    let pick = |lo: usize, hi: usize| {
        let mut v: Vec<f64> = result
            .series
            .iter()
            .filter(|p| p.n >= lo && p.n < hi && p.source < p.n)
            .map(|p| p.b_norm)
            .collect();
        median(&mut v)
    };
    let early = pick(BURN_IN, 10 * BURN_IN);
    let late = pick(horizon / 10, horizon);
    if early.is_nan() || late.is_nan() {
        return Err(Error::Analysis("no delayed records in the first or last decade".into()));
    }
    Ok(DriftDecay {
        early_median: early,
        late_median: late,
    })
}
