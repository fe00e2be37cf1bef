//! Replicated experiment runs and their CSV / JSON outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use delaysgd::analysis::{aggregate, ergodic_average, EnsembleSummary, Metric};
use delaysgd::asynchrony::{gen_trace, pairing_verdict, Trace};
use delaysgd::engine::{
    run_dagd, run_dasgd_projected, run_dasgd_unconstrained, run_threaded, RunConfig, RunResult, ThreadedConfig,
};
use delaysgd::geometry::{FeasibleSet, SetKind};
use delaysgd::objectives::{make_test_objective, Objective};
use delaysgd::rng::{derive_seed, stream, stream_rng};
use rayon::prelude::*;
use serde::Serialize;

use crate::spec::{to_text, Algorithm, ExperimentSpec, InitSpec};
use crate::CliError;

pub const RUN_CSV_HEADER: &str = "run_id,n,alpha_n,s_n,f_value,grad_norm_sq,energy,dist_to_opt,b_n_norm";
pub const THREADS_ENV: &str = "DELAYSGD_THREADS";

/// Seed of replication `r`; also the master seed of its trace and noise.
pub fn replication_seed(master_seed: u64, r: usize) -> u64 {
    derive_seed(master_seed, stream::REPLICATION, r as u64)
}

pub fn initial_point(spec: &ExperimentSpec, set: &FeasibleSet, r: usize) -> Vec<f64> {
    match &spec.init {
        InitSpec::Point(p) => p.clone(),
        InitSpec::Random {
            seed,
            per_replication,
            region,
        } => {
            let index = if *per_replication { r as u64 } else { 0 };
            let mut rng = stream_rng(*seed, stream::INIT, index);
            match region {
                None => set.sample_uniform(&mut rng),
                Some((lo, hi)) => {
                    let x = FeasibleSet::new_box(lo.clone(), hi.clone())
                        .expect("validated at parse time")
                        .sample_uniform(&mut rng);
                    set.project(&x).expect("dimensions validated at parse time")
                }
            }
        }
    }
}

pub fn objective(spec: &ExperimentSpec) -> Arc<dyn Objective> {
    Arc::new(make_test_objective(spec.objective, spec.dim).expect("validated at parse time"))
}

/// The runner `auto` resolves to.
pub fn resolve_algorithm(spec: &ExperimentSpec) -> Algorithm {
    match spec.algorithm {
        Algorithm::Auto if spec.noise.is_none() => Algorithm::Dagd,
        Algorithm::Auto => match spec.feasible_set().kind() {
            SetKind::AllSpace => Algorithm::Unconstrained,
            _ => Algorithm::Projected,
        },
        a => a,
    }
}

/// Config of replication `r`, optionally on a given trace.
pub fn run_config(spec: &ExperimentSpec, r: usize, trace: Option<Arc<Trace>>) -> Result<RunConfig, CliError> {
    let set = spec.feasible_set();
    let trace = match trace {
        Some(t) => t,
        None => Arc::new(gen_trace(
            spec.delay,
            spec.arch,
            spec.workers,
            spec.iterations,
            replication_seed(spec.master_seed, r),
        )?),
    };
    Ok(RunConfig {
        objective: objective(spec),
        noise: spec.noise,
        y0: initial_point(spec, &set, r),
        set,
        schedule: spec.schedule,
        trace,
        record_every: spec.record_every,
        record_iterates: false,
    })
}

/// Runs a logical config with the runner the spec asks for.
pub fn execute(spec: &ExperimentSpec, cfg: &RunConfig) -> Result<RunResult, CliError> {
    let result = match resolve_algorithm(spec) {
        Algorithm::Dagd => run_dagd(cfg)?,
        Algorithm::Projected => run_dasgd_projected(cfg)?,
        Algorithm::Unconstrained => run_dasgd_unconstrained(cfg)?,
        // Replays of threaded runs go through the logical runner.
        Algorithm::Threaded | Algorithm::Auto => {
            if cfg.set.is_compact() {
                run_dasgd_projected(cfg)?
            } else {
                run_dasgd_unconstrained(cfg)?
            }
        }
    };
    Ok(result)
}

pub struct Replication {
    pub run_id: usize,
    pub result: RunResult,
    /// `f(X̄_n)` at each record point past the first, when iterates were kept.
    pub ergodic_f: Option<Vec<(usize, f64)>>,
    /// `X_n` at each record point, kept for replication 0 only.
    pub trajectory: Option<Vec<(usize, Vec<f64>)>>,
}

pub fn run_replication(spec: &ExperimentSpec, r: usize) -> Result<Replication, CliError> {
    let obj = objective(spec);
    let mut result = if resolve_algorithm(spec) == Algorithm::Threaded {
        let set = spec.feasible_set();
        let cfg = ThreadedConfig {
            objective: obj.clone(),
            noise: spec.noise,
            y0: initial_point(spec, &set, r),
            set,
            schedule: spec.schedule,
            workers: spec.workers,
            iterations: spec.iterations,
            master_seed: replication_seed(spec.master_seed, r),
            record_every: spec.record_every,
        };
        run_threaded(&cfg)?.0
    } else {
        let mut cfg = run_config(spec, r, None)?;
        cfg.record_iterates = true;
        execute(spec, &cfg)?
    };
    let ergodic_f = match result.iterates {
        Some(_) if !result.is_diverged() => Some(
            ergodic_average(&result, &spec.schedule)?
                .into_iter()
                .map(|(n, x)| (n, obj.value(&x)))
                .collect(),
        ),
        _ => None,
    };
    let trajectory = match result.iterates.take() {
        Some(it) if r == 0 => Some(result.series.iter().map(|p| p.n).zip(it).collect()),
        _ => None,
    };
    Ok(Replication {
        run_id: r,
        result,
        ergodic_f,
        trajectory,
    })
}

/// A rayon pool capped by `DELAYSGD_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run_replications(spec: &ExperimentSpec) -> Result<Vec<Replication>, CliError> {
    let pool = thread_pool()?;
    pool.install(|| {
        (0..spec.replications)
            .into_par_iter()
            .map(|r| run_replication(spec, r))
            .collect()
    })
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_run_csv<W: Write>(mut w: W, run_id: usize, result: &RunResult) -> std::io::Result<()> {
    writeln!(w, "{RUN_CSV_HEADER}")?;
    for p in &result.series {
        writeln!(
            w,
            "{run_id},{},{},{},{},{},{},{},{}",
            p.n,
            fmt_f64(p.alpha),
            p.source,
            fmt_f64(p.f_value),
            fmt_f64(p.grad_norm_sq),
            fmt_opt(p.energy),
            fmt_opt(p.dist_to_opt),
            fmt_f64(p.b_norm),
        )?;
    }
    w.flush()
}

pub fn write_ensemble_csv<W: Write>(mut w: W, summaries: &[EnsembleSummary]) -> std::io::Result<()> {
    let mut header = vec!["n".to_string()];
    for s in summaries {
        for stat in ["mean", "median", "min", "max"] {
            header.push(format!("{}_{stat}", s.metric));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    let Some(first) = summaries.first() else {
        return w.flush();
    };
    for (j, n) in first.ns.iter().enumerate() {
        let mut row = vec![n.to_string()];
        for s in summaries {
            for v in [s.mean[j], s.median[j], s.min[j], s.max[j]] {
                row.push(fmt_f64(v));
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Ensemble summaries of every metric recorded by all converged runs.
pub fn ensemble(reps: &[Replication]) -> Vec<EnsembleSummary> {
    let results: Vec<RunResult> = reps
        .iter()
        .filter(|r| !r.result.is_diverged())
        .map(|r| r.result.clone())
        .collect();
    if results.is_empty() {
        return Vec::new();
    }
    Metric::ALL
        .into_iter()
        .filter_map(|m| aggregate(&results, m).ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let median = delaysgd::analysis::median(&mut v);
        Some(Stats {
            mean,
            median,
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalState {
    pub run_id: usize,
    pub diverged_at: Option<usize>,
    pub f_value: f64,
    pub grad_norm_sq: f64,
    pub dist_to_opt: Option<f64>,
    pub ergodic_f_value: Option<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub created_unix: u64,
    pub spec: String,
    pub algorithm: String,
    pub pairing: String,
    pub replications: usize,
    pub iterations: usize,
    pub diverged: Vec<usize>,
    pub trace_max_delay: usize,
    /// Statistics of `f(X_N)` over converged replications.
    pub final_f: Option<Stats>,
    pub final_grad_norm_sq: Option<Stats>,
    pub final_dist_to_opt: Option<Stats>,
    pub final_ergodic_f: Option<Stats>,
    pub runs: Vec<FinalState>,
}

impl Summary {
    pub fn any_diverged(&self) -> bool {
        !self.diverged.is_empty()
    }
}

pub fn summarize(spec: &ExperimentSpec, reps: &[Replication]) -> Summary {
    let obj = objective(spec);
    let runs: Vec<FinalState> = reps
        .iter()
        .map(|r| {
            let x = &r.result.final_x;
            let g = obj.gradient(x);
            let optima = obj.optima();
            FinalState {
                run_id: r.run_id,
                diverged_at: r.result.diverged,
                f_value: obj.value(x),
                grad_norm_sq: g.iter().map(|v| v * v).sum(),
                dist_to_opt: (!optima.is_empty()).then(|| {
                    optima
                        .iter()
                        .map(|o| o.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                        .fold(f64::INFINITY, f64::min)
                        .sqrt()
                }),
                ergodic_f_value: r.ergodic_f.as_ref().and_then(|e| e.last().map(|p| p.1)),
                x: x.clone(),
            }
        })
        .collect();
    let ok: Vec<&FinalState> = runs.iter().filter(|r| r.diverged_at.is_none()).collect();
    let collect = |f: &dyn Fn(&FinalState) -> Option<f64>| -> Option<Stats> {
        let v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        if v.len() == ok.len() {
            Stats::of(&v)
        } else {
            None
        }
    };
    Summary {
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        spec: to_text(spec),
        algorithm: resolve_algorithm(spec).as_str().to_string(),
        pairing: pairing_verdict(&spec.schedule, &spec.delay).to_string(),
        replications: reps.len(),
        iterations: spec.iterations,
        diverged: runs
            .iter()
            .filter(|r| r.diverged_at.is_some())
            .map(|r| r.run_id)
            .collect(),
        trace_max_delay: reps.first().map_or(0, |r| r.result.trace.max_delay()),
        final_f: collect(&|r| Some(r.f_value)),
        final_grad_norm_sq: collect(&|r| Some(r.grad_norm_sq)),
        final_dist_to_opt: collect(&|r| r.dist_to_opt),
        final_ergodic_f: collect(&|r| r.ergodic_f_value),
        runs,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Runs every replication and writes `replications/run_XXXX.csv`,
/// `ensemble.csv`, `ergodic.csv`, `summary.json` and, for replication 0,
/// `trace.csv` and `trajectory.csv` under `out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Summary, CliError> {
    let rep_dir = out_dir.join("replications");
    fs::create_dir_all(&rep_dir).map_err(|e| CliError::io(&rep_dir, e))?;
    let reps = run_replications(spec)?;

    for r in &reps {
        let path = rep_dir.join(format!("run_{:04}.csv", r.run_id));
        write_run_csv(create(&path)?, r.run_id, &r.result).map_err(|e| CliError::io(&path, e))?;
    }
    let path = out_dir.join("ensemble.csv");
    write_ensemble_csv(create(&path)?, &ensemble(&reps)).map_err(|e| CliError::io(&path, e))?;

    let path = out_dir.join("ergodic.csv");
    write_ergodic_csv(create(&path)?, &reps).map_err(|e| CliError::io(&path, e))?;

    if let Some(r0) = reps.first() {
        let path = out_dir.join("trace.csv");
        r0.result.trace.write_csv(create(&path)?)?;
        if let Some(traj) = &r0.trajectory {
            let path = out_dir.join("trajectory.csv");
            write_trajectory_csv(create(&path)?, spec.dim, traj).map_err(|e| CliError::io(&path, e))?;
        }
    }

    let summary = summarize(spec, &reps);
    let path = out_dir.join("summary.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}

/// `f(X̄_n)`: the sample of replication 0 plus mean/min/max over converged
/// replications.
pub fn write_ergodic_csv<W: Write>(mut w: W, reps: &[Replication]) -> std::io::Result<()> {
    writeln!(w, "n,f_ergodic_run0,f_ergodic_mean,f_ergodic_min,f_ergodic_max")?;
    let series: Vec<&Vec<(usize, f64)>> = reps.iter().filter_map(|r| r.ergodic_f.as_ref()).collect();
    let Some(first) = series.first() else {
        return w.flush();
    };
    if series.iter().any(|s| s.len() != first.len()) {
        return w.flush();
    }
    for (j, (n, f0)) in first.iter().enumerate() {
        let vals: Vec<f64> = series.iter().map(|s| s[j].1).collect();
        let s = Stats::of(&vals).expect("non-empty");
        writeln!(
            w,
            "{n},{},{},{},{}",
            fmt_f64(*f0),
            fmt_f64(s.mean),
            fmt_f64(s.min),
            fmt_f64(s.max)
        )?;
    }
    w.flush()
}

/// `X_n` of replication 0 at each record point.
pub fn write_trajectory_csv<W: Write>(mut w: W, dim: usize, traj: &[(usize, Vec<f64>)]) -> std::io::Result<()> {
    let cols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "n,{}", cols.join(","))?;
    for (n, x) in traj {
        let vals: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{n},{}", vals.join(","))?;
    }
    w.flush()
}
