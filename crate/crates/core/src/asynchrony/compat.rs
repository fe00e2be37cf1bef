use std::fmt;

use super::delay::{gen_trace, DelayModel};
use super::schedule::{ScheduleKind, StepSchedule};
use super::trace::{Architecture, Trace};
use crate::analysis::{last_decade_slope, log_spaced_indices};
use crate::error::{Error, Result};

/// Worker count of the traces generated by [`compatibility_check`].
pub const COMPAT_WORKERS: usize = 4;
pub const COMPAT_SEED: u64 = 0;

/// Delay classes, one per admissible (delay, step size) pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssumptionCase {
    Bounded,
    Sublinear,
    Linear,
    Polynomial,
}

impl AssumptionCase {
    pub fn of(model: &DelayModel) -> AssumptionCase {
        match model {
            DelayModel::None | DelayModel::Constant { .. } | DelayModel::RoundRobin => AssumptionCase::Bounded,
            DelayModel::Sublinear { .. } => AssumptionCase::Sublinear,
            DelayModel::Linear { .. } | DelayModel::RandomLinear { .. } => AssumptionCase::Linear,
            DelayModel::Polynomial { .. } => AssumptionCase::Polynomial,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AssumptionCase::Bounded => "bounded",
            AssumptionCase::Sublinear => "sublinear",
            AssumptionCase::Linear => "linear",
            AssumptionCase::Polynomial => "polynomial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sanctioned(AssumptionCase),
    NotSanctioned { reason: String },
}

impl Verdict {
    pub fn is_sanctioned(&self) -> bool {
        matches!(self, Verdict::Sanctioned(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sanctioned(case) => write!(f, "sanctioned ({} delays)", case.as_str()),
            Verdict::NotSanctioned { reason } => write!(f, "not sanctioned: {reason}"),
        }
    }
}

/// Whether the schedule is the one paired with the model's delay class.
/// Bounded delays accept any square-summable, non-summable schedule; the
/// growing classes each require their specific decay.
pub fn pairing_verdict(sched: &StepSchedule, model: &DelayModel) -> Verdict {
    let case = AssumptionCase::of(model);
    let required = match case {
        AssumptionCase::Bounded => {
            return if sched.is_square_summable() {
                Verdict::Sanctioned(case)
            } else {
                Verdict::NotSanctioned {
                    reason: "bounded delays need a square-summable step size".into(),
                }
            };
        }
        AssumptionCase::Sublinear => ScheduleKind::InvN,
        AssumptionCase::Linear => ScheduleKind::InvNLogN,
        AssumptionCase::Polynomial => ScheduleKind::InvNLogNLogLogN,
    };
    if sched.kind == required {
        Verdict::Sanctioned(case)
    } else {
        Verdict::NotSanctioned {
            reason: format!(
                "{} delays need the {} step size, got {}",
                case.as_str(),
                required.as_str(),
                sched.kind.as_str()
            ),
        }
    }
}

/// Partial sums on a trace; entry `n` covers iterations `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummabilitySums {
    /// `S1(n) = sum_{k<=n} a_{k+1}^2`.
    pub s1: Vec<f64>,
    /// `S2(n) = sum_{k<=n} a_{k+1} sum_{r=s(k)}^{k-1} a_{r+1}`.
    pub s2: Vec<f64>,
}

pub fn summability_sums(sched: &StepSchedule, trace: &Trace) -> SummabilitySums {
    let n_iter = trace.len();
    // prefix[m] = a_1 + ... + a_m
    let mut prefix = Vec::with_capacity(n_iter + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for m in 1..=n_iter {
        acc += sched.step(m as u64);
        prefix.push(acc);
    }
    let mut s1 = Vec::with_capacity(n_iter);
    let mut s2 = Vec::with_capacity(n_iter);
    let (mut a1, mut a2) = (0.0, 0.0);
    for e in &trace.entries {
        let a = prefix[e.n + 1] - prefix[e.n];
        a1 += a * a;
        a2 += a * (prefix[e.n] - prefix[e.source]);
        s1.push(a1);
        s2.push(a2);
    }
    SummabilitySums { s1, s2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub verdict: Verdict,
    pub horizon: usize,
    pub max_delay: usize,
    pub s1_final: f64,
    pub s2_final: f64,
    /// Least-squares slope of `ln S` against `ln n` over the last decade.
    pub s1_slope: f64,
    pub s2_slope: f64,
}

impl fmt::Display for CompatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "horizon: {}  max delay: {}", self.horizon, self.max_delay)?;
        writeln!(f, "S1 = {:.6e} (slope {:.4})", self.s1_final, self.s1_slope)?;
        write!(f, "S2 = {:.6e} (slope {:.4})", self.s2_final, self.s2_slope)
    }
}

/// Verdict plus partial sums on a master-worker trace generated with
/// [`COMPAT_WORKERS`] workers and [`COMPAT_SEED`].
pub fn compatibility_check(sched: &StepSchedule, model: &DelayModel, horizon: usize) -> Result<CompatReport> {
    if horizon < 1000 {
        return Err(Error::InvalidRun(format!(
            "compatibility horizon must be at least 1000 to fit a last-decade slope, got {horizon}"
        )));
    }
    let trace = gen_trace(*model, Architecture::MasterWorker, COMPAT_WORKERS, horizon, COMPAT_SEED)?;
    compatibility_check_on(sched, model, &trace)
}

pub fn compatibility_check_on(sched: &StepSchedule, model: &DelayModel, trace: &Trace) -> Result<CompatReport> {
    if trace.is_empty() {
        return Err(Error::InvalidRun("empty trace".into()));
    }
    let sums = summability_sums(sched, trace);
    let ns = log_spaced_indices(trace.len(), 200);
    let at = |series: &[f64]| -> (Vec<f64>, Vec<f64>) { ns.iter().map(|&i| ((i + 1) as f64, series[i])).unzip() };
    let (x1, y1) = at(&sums.s1);
    let (x2, y2) = at(&sums.s2);
    Ok(CompatReport {
        verdict: pairing_verdict(sched, model),
        horizon: trace.len(),
        max_delay: trace.max_delay(),
        s1_final: *sums.s1.last().unwrap(),
        s2_final: *sums.s2.last().unwrap(),
        s1_slope: last_decade_slope(&x1, &y1),
        s2_slope: last_decade_slope(&x2, &y2),
    })
}
