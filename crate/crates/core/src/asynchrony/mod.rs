//! Step-size schedules, delay models and the traces they generate.
//!
//! A [`Trace`] lists, for every global iteration `n`, the source iteration
//! `s(n)` whose iterate the applied gradient was computed at, and the seed of
//! the gradient noise. Runners consume traces; nothing else about asynchrony
//! leaks into them.

mod compat;
mod delay;
mod schedule;
mod trace;

pub use compat::{
    compatibility_check, compatibility_check_on, pairing_verdict, summability_sums, AssumptionCase, CompatReport,
    SummabilitySums, Verdict, COMPAT_SEED, COMPAT_WORKERS,
};
pub use delay::{gen_trace, DelayModel};
pub use schedule::{ScheduleKind, StepSchedule, DEFAULT_OFFSET};
pub use trace::{
    validate_trace, Architecture, Trace, TraceEntry, TraceReport, TraceRule, TraceViolation, TRACE_CSV_HEADER,
};
