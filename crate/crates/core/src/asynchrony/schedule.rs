use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Index shift applied by default so that `log` and `log log` are positive
/// from `n = 1`.
pub const DEFAULT_OFFSET: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// `α_n = c`
    Constant,
    /// `α_n = c / m`
    InvN,
    /// `α_n = c / (m log m)`
    InvNLogN,
    /// `α_n = c / (m log m log log m)`
    InvNLogNLogLogN,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 4] = [
        ScheduleKind::Constant,
        ScheduleKind::InvN,
        ScheduleKind::InvNLogN,
        ScheduleKind::InvNLogNLogLogN,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::InvN => "inv_n",
            ScheduleKind::InvNLogN => "inv_nlogn",
            ScheduleKind::InvNLogNLogLogN => "inv_nlogn_loglogn",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ScheduleKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown schedule `{s}` (expected constant, inv_n, inv_nlogn or inv_nlogn_loglogn)"))
    }
}

/// The step-size sequence `α_n`, evaluated at `m = n + offset`.
///
/// For the logarithmic kinds `m` is floored at 2 (resp. 3) so that every step
/// is finite and positive whatever the offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub kind: ScheduleKind,
    pub c: f64,
    pub offset: u64,
}

impl StepSchedule {
    pub fn new(kind: ScheduleKind, c: f64, offset: u64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidSchedule(format!("scale c must be positive, got {c}")));
        }
        Ok(StepSchedule { kind, c, offset })
    }

    pub fn constant(c: f64) -> Self {
        StepSchedule {
            kind: ScheduleKind::Constant,
            c,
            offset: 0,
        }
    }

    pub fn inv_n(c: f64) -> Self {
        StepSchedule {
            kind: ScheduleKind::InvN,
            c,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn inv_nlogn(c: f64) -> Self {
        StepSchedule {
            kind: ScheduleKind::InvNLogN,
            c,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn inv_nlogn_loglogn(c: f64) -> Self {
        StepSchedule {
            kind: ScheduleKind::InvNLogNLogLogN,
            c,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn with_offset(mut self, offset: u64) -> Self {
        self.offset = offset;
        self
    }

    /// `α_n` for `n ≥ 1`.
    #[inline]
    pub fn step(&self, n: u64) -> f64 {
        debug_assert!(n >= 1, "steps are indexed from 1");
        let m = n.saturating_add(self.offset) as f64;
        match self.kind {
            ScheduleKind::Constant => self.c,
            ScheduleKind::InvN => self.c / m.max(1.0),
            ScheduleKind::InvNLogN => {
                let m = m.max(2.0);
                self.c / (m * m.ln())
            }
            ScheduleKind::InvNLogNLogLogN => {
                let m = m.max(3.0);
                let l = m.ln();
                self.c / (m * l * l.ln())
            }
        }
    }

    /// `Σ α_n² < ∞`.
    pub fn is_square_summable(&self) -> bool {
        !matches!(self.kind, ScheduleKind::Constant)
    }
}
