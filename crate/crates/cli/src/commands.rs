//! The CLI verbs, returning their report text so they can be tested without
//! spawning a process.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use delaysgd::asynchrony::{compatibility_check, validate_trace, Architecture, Trace};
use delaysgd::objectives::check_vc_on_grid;

use crate::experiment::{self, execute, run_config, run_experiment, Summary};
use crate::spec::ExperimentSpec;
use crate::CliError;

/// Exit status of a verb that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A check reported a failure (incoherent objective, bad trace, ...).
    CheckFailed,
    /// At least one replication diverged.
    Diverged,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::CheckFailed => 1,
            Outcome::Diverged => 3,
        }
    }
}

pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<(Summary, Outcome), CliError> {
    let summary = run_experiment(spec, out_dir)?;
    let outcome = if summary.any_diverged() {
        Outcome::Diverged
    } else {
        Outcome::Ok
    };
    Ok((summary, outcome))
}

pub fn run_report(summary: &Summary, out_dir: &Path) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} replications of {} iterations ({})",
        summary.replications, summary.iterations, summary.algorithm
    );
    let _ = writeln!(s, "pairing: {}", summary.pairing);
    if let Some(f) = &summary.final_f {
        let _ = writeln!(s, "final f: mean {:.6e}  min {:.6e}  max {:.6e}", f.mean, f.min, f.max);
    }
    if let Some(d) = &summary.final_dist_to_opt {
        let _ = writeln!(
            s,
            "final distance to optimum: median {:.6e}  max {:.6e}",
            d.median, d.max
        );
    }
    if summary.any_diverged() {
        let _ = writeln!(s, "diverged replications: {:?}", summary.diverged);
    }
    let _ = write!(s, "outputs written to {}", out_dir.display());
    s
}

pub fn check_vc(spec: &ExperimentSpec) -> Result<(String, Outcome), CliError> {
    let obj = experiment::objective(spec);
    let set = spec.feasible_set();
    let report = check_vc_on_grid(obj.as_ref(), &set, spec.vc_grid_per_axis, spec.vc_tolerance)?;
    let mut s = String::new();
    let _ = writeln!(s, "objective: {} (dim {})", spec.objective, spec.dim);
    let _ = writeln!(s, "grid points checked: {}", report.checked_points);
    let _ = writeln!(
        s,
        "min <grad f(x), x - x*>: {:?} at {:?}",
        report.min_inner_product, report.argmin
    );
    let _ = writeln!(s, "violations: {}", report.violations.len());
    for (x, v) in report.violations.iter().take(5) {
        let _ = writeln!(s, "  {x:?}: {v:?}");
    }
    let _ = writeln!(
        s,
        "equality points outside the solution set: {}",
        report.equality_points_outside_optima.len()
    );
    for x in report.equality_points_outside_optima.iter().take(5) {
        let _ = writeln!(s, "  {x:?}");
    }
    let coherent = report.is_coherent();
    let _ = write!(
        s,
        "variationally coherent on the grid: {}",
        if coherent { "yes" } else { "no" }
    );
    Ok((s, if coherent { Outcome::Ok } else { Outcome::CheckFailed }))
}

pub fn check_compat(spec: &ExperimentSpec) -> Result<(String, Outcome), CliError> {
    let report = compatibility_check(&spec.schedule, &spec.delay, spec.iterations)?;
    let s = format!(
        "schedule: {} (c = {}, offset = {})\ndelays: {}\n{report}",
        spec.schedule.kind.as_str(),
        spec.schedule.c,
        spec.schedule.offset,
        spec.delay
    );
    let outcome = if report.verdict.is_sanctioned() {
        Outcome::Ok
    } else {
        Outcome::CheckFailed
    };
    Ok((s, outcome))
}

pub fn read_trace(path: &Path, arch: Architecture, workers: usize) -> Result<Trace, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(Trace::read_csv(BufReader::new(f), arch, workers)?)
}

pub fn validate_trace_file(path: &Path, arch: Architecture, workers: usize) -> Result<(String, Outcome), CliError> {
    let trace = read_trace(path, arch, workers)?;
    let report = validate_trace(&trace);
    if report.is_ok() {
        return Ok((
            format!("ok: {} entries, max delay {}", trace.len(), trace.max_delay()),
            Outcome::Ok,
        ));
    }
    let mut s = format!("{} violations", report.violations.len());
    for v in report.violations.iter().take(20) {
        let _ = write!(s, "\n  {v}");
    }
    Ok((s, Outcome::CheckFailed))
}

/// Re-runs replication 0 of `spec` on a recorded trace and reports the final
/// iterate as JSON.
pub fn replay(spec: &ExperimentSpec, trace_path: &Path, out_dir: Option<&Path>) -> Result<(String, Outcome), CliError> {
    let trace = read_trace(trace_path, spec.arch, spec.workers)?;
    let cfg = run_config(spec, 0, Some(Arc::new(trace)))?;
    let result = execute(spec, &cfg)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("replay.csv");
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        experiment::write_run_csv(std::io::BufWriter::new(f), 0, &result).map_err(|e| CliError::io(&path, e))?;
    }
    let json = serde_json::json!({
        "iterations": result.trace.len(),
        "diverged_at": result.diverged,
        "final_x": result.final_x,
        "final_y": result.final_y,
        "final_f": cfg.objective.value(&result.final_x),
    });
    let outcome = if result.is_diverged() {
        Outcome::Diverged
    } else {
        Outcome::Ok
    };
    Ok((serde_json::to_string_pretty(&json)?, outcome))
}
