//! Experiment specification files.
//!
//! A spec is a TOML document with the sections `objective`, `noise`, `set`,
//! `schedule`, `delay`, `run`, `init` and `vc`. Only `objective.name`,
//! `objective.dim` and `run.iterations` are required.

use std::fmt;
use std::str::FromStr;

use delaysgd::asynchrony::{Architecture, DelayModel, ScheduleKind, StepSchedule, DEFAULT_OFFSET};
use delaysgd::geometry::FeasibleSet;
use delaysgd::objectives::{make_test_objective, NoiseModel, TestFunction, DEFAULT_VC_TOLERANCE};
use toml::{Table, Value};

pub const DEFAULT_WORKERS: usize = 4;
pub const DEFAULT_GRID_PER_AXIS: usize = 101;

/// One problem with a spec, tied to the dotted key that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecErrors(pub Vec<SpecError>);

impl fmt::Display for SpecErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SpecErrors {}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    AllSpace,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl SetSpec {
    pub fn build(&self, dim: usize) -> delaysgd::Result<FeasibleSet> {
        match self {
            SetSpec::AllSpace => Ok(FeasibleSet::all_space(dim)),
            SetSpec::Box { lo, hi } => FeasibleSet::new_box(lo.clone(), hi.clone()),
            SetSpec::Ball { center, radius } => FeasibleSet::ball(center.clone(), *radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Point(Vec<f64>),
    /// Uniform on `region` (a box given by `init.lo`/`init.hi`) projected
    /// onto the feasible set, or uniform on the feasible set itself (on
    /// `[-1, 1]^d` for the whole space).
    Random {
        seed: u64,
        per_replication: bool,
        region: Option<(Vec<f64>, Vec<f64>)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Deterministic runner without noise, otherwise projected on compact
    /// sets and unconstrained on the whole space.
    Auto,
    Dagd,
    Unconstrained,
    Projected,
    /// Real threads on shared memory; the delay model is not used.
    Threaded,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Dagd => "dagd",
            Algorithm::Unconstrained => "unconstrained",
            Algorithm::Projected => "projected",
            Algorithm::Threaded => "threaded",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Algorithm::Auto,
            Algorithm::Dagd,
            Algorithm::Unconstrained,
            Algorithm::Projected,
            Algorithm::Threaded,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
        .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub objective: TestFunction,
    pub dim: usize,
    pub noise: NoiseModel,
    pub set: SetSpec,
    pub schedule: StepSchedule,
    pub delay: DelayModel,
    pub arch: Architecture,
    pub workers: usize,
    pub iterations: usize,
    pub record_every: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub algorithm: Algorithm,
    pub init: InitSpec,
    pub vc_grid_per_axis: usize,
    pub vc_tolerance: f64,
}

impl ExperimentSpec {
    pub fn feasible_set(&self) -> FeasibleSet {
        self.set.build(self.dim).expect("validated at parse time")
    }
}

/// Record interval used when `run.record_every` is absent.
pub fn default_record_every(iterations: usize) -> usize {
    if iterations >= 100_000 {
        10
    } else {
        1
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("objective", &["name", "dim"]),
    ("noise", &["kind", "sigma"]),
    ("set", &["kind", "lo", "hi", "center", "radius"]),
    ("schedule", &["kind", "c", "offset"]),
    ("delay", &["kind", "d", "p", "q", "k_coef", "rate", "jitter_seed"]),
    (
        "run",
        &[
            "arch",
            "workers",
            "iterations",
            "record_every",
            "replications",
            "master_seed",
            "algorithm",
        ],
    ),
    (
        "init",
        &["kind", "point", "value", "seed", "per_replication", "lo", "hi"],
    ),
    ("vc", &["grid_per_axis", "tolerance"]),
];

struct Reader<'a> {
    root: &'a Table,
    errors: Vec<SpecError>,
}

impl<'a> Reader<'a> {
    fn err(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(SpecError {
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn raw(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.root
            .get(section)
            .and_then(Value::as_table)
            .and_then(|t| t.get(key))
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    fn str(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.raw(section, key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.err(&format!("{section}.{key}"), "expected a string");
                None
            }
        }
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.raw(section, key)?;
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.err(&format!("{section}.{key}"), "expected a number");
                None
            }
        }
    }

    fn uint(&mut self, section: &str, key: &str) -> Option<u64> {
        let v = self.raw(section, key)?;
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            // Seeds above i64::MAX do not fit a TOML integer.
            Value::String(s) if s.parse::<u64>().is_ok() => s.parse().ok(),
            _ => {
                self.err(&format!("{section}.{key}"), "expected a non-negative integer");
                None
            }
        }
    }

    fn bool(&mut self, section: &str, key: &str) -> Option<bool> {
        let v = self.raw(section, key)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.err(&format!("{section}.{key}"), "expected true or false");
                None
            }
        }
    }

    /// A list of numbers, or a scalar broadcast to `dim` entries.
    fn vector(&mut self, section: &str, key: &str, dim: Option<usize>) -> Option<Vec<f64>> {
        let v = self.raw(section, key)?;
        let path = format!("{section}.{key}");
        let out = match v {
            Value::Float(_) | Value::Integer(_) => {
                let x = self.float(section, key)?;
                vec![x; dim?]
            }
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    match it {
                        Value::Float(f) => out.push(*f),
                        Value::Integer(i) => out.push(*i as f64),
                        _ => {
                            self.err(&path, "expected a list of numbers");
                            return None;
                        }
                    }
                }
                out
            }
            _ => {
                self.err(&path, "expected a number or a list of numbers");
                return None;
            }
        };
        if let Some(d) = dim {
            if out.len() != d {
                self.err(&path, format!("expected {d} entries, found {}", out.len()));
                return None;
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            self.err(&path, "entries must be finite");
            return None;
        }
        Some(out)
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, section: &str, key: &str, default: Option<T>) -> Option<T> {
        match self.str(section, key) {
            Some(s) => match s.parse() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.err(&format!("{section}.{key}"), e);
                    None
                }
            },
            None if self.has(section, key) => None,
            None => {
                if default.is_none() {
                    self.err(&format!("{section}.{key}"), "missing required key");
                }
                default
            }
        }
    }
}

fn schedule_kind(s: &str) -> Result<ScheduleKind, String> {
    ScheduleKind::ALL
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown schedule `{s}` (expected constant, inv_n, inv_nlogn or inv_nlogn_loglogn)"))
}

/// Parses and validates a spec, reporting every problem found.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        SpecErrors(vec![SpecError {
            key: "<document>".into(),
            message: e.message().to_string(),
        }])
    })?;
    let mut r = Reader {
        root: &root,
        errors: Vec::new(),
    };

    for (name, value) in &root {
        match SECTIONS.iter().find(|(s, _)| s == name) {
            None => r.err(name, "unknown section"),
            Some((_, keys)) => match value.as_table() {
                None => r.err(name, "expected a section"),
                Some(t) => {
                    for k in t.keys() {
                        if !keys.contains(&k.as_str()) {
                            r.err(&format!("{name}.{k}"), "unknown key");
                        }
                    }
                }
            },
        }
    }

    let objective: Option<TestFunction> = r.parsed("objective", "name", None);
    let dim = match r.uint("objective", "dim") {
        Some(0) => {
            r.err("objective.dim", "must be at least 1");
            None
        }
        Some(d) => Some(d as usize),
        None => {
            if !r.has("objective", "dim") {
                r.err("objective.dim", "missing required key");
            }
            None
        }
    };
    if let (Some(f), Some(d)) = (objective, dim) {
        if let Err(e) = make_test_objective(f, d) {
            r.err("objective.dim", e.to_string());
        }
    }

    let noise = match r.str("noise", "kind").unwrap_or("none") {
        "none" => {
            if r.has("noise", "sigma") {
                r.err("noise.sigma", "only meaningful for gaussian noise");
            }
            Some(NoiseModel::None)
        }
        "gaussian" => {
            let sigma = r.float("noise", "sigma").unwrap_or(1.0);
            if sigma.is_finite() && sigma >= 0.0 {
                Some(NoiseModel::gaussian(sigma))
            } else {
                r.err("noise.sigma", "must be non-negative and finite");
                None
            }
        }
        other => {
            r.err(
                "noise.kind",
                format!("unknown noise `{other}` (expected none or gaussian)"),
            );
            None
        }
    };

    let set = match r.str("set", "kind").unwrap_or("all_space") {
        "all_space" => Some(SetSpec::AllSpace),
        "box" => {
            let lo = r.vector("set", "lo", dim);
            let hi = r.vector("set", "hi", dim);
            for key in ["lo", "hi"] {
                if !r.has("set", key) {
                    r.err(&format!("set.{key}"), "missing required key for a box");
                }
            }
            match (lo, hi) {
                (Some(lo), Some(hi)) => {
                    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                        r.err("set.hi", "every upper bound must be at least the lower bound");
                        None
                    } else {
                        Some(SetSpec::Box { lo, hi })
                    }
                }
                _ => None,
            }
        }
        "ball" => {
            let center = if r.has("set", "center") {
                r.vector("set", "center", dim)
            } else {
                dim.map(|d| vec![0.0; d])
            };
            let radius = r.float("set", "radius").unwrap_or(1.0);
            if !(radius > 0.0 && radius.is_finite()) {
                r.err("set.radius", "must be positive and finite");
            }
            center.map(|center| SetSpec::Ball { center, radius })
        }
        other => {
            r.err(
                "set.kind",
                format!("unknown set `{other}` (expected all_space, box or ball)"),
            );
            None
        }
    };

    let schedule = {
        let kind = match r.str("schedule", "kind") {
            Some(s) => match schedule_kind(s) {
                Ok(k) => Some(k),
                Err(e) => {
                    r.err("schedule.kind", e);
                    None
                }
            },
            None if r.has("schedule", "kind") => None,
            None => {
                r.err("schedule.kind", "missing required key");
                None
            }
        };
        let c = r.float("schedule", "c").unwrap_or(1.0);
        if !(c > 0.0 && c.is_finite()) {
            r.err("schedule.c", "must be positive and finite");
        }
        let offset = r.uint("schedule", "offset").unwrap_or(DEFAULT_OFFSET);
        kind.and_then(|k| StepSchedule::new(k, c, offset).ok())
    };

    let delay = parse_delay(&mut r);

    let arch: Option<Architecture> = r.parsed("run", "arch", Some(Architecture::MasterWorker));
    let workers = match r.uint("run", "workers").unwrap_or(DEFAULT_WORKERS as u64) {
        0 => {
            r.err("run.workers", "must be at least 1");
            None
        }
        k => Some(k as usize),
    };
    let iterations = match r.uint("run", "iterations") {
        Some(0) => {
            r.err("run.iterations", "must be at least 1");
            None
        }
        Some(n) => Some(n as usize),
        None => {
            if !r.has("run", "iterations") {
                r.err("run.iterations", "missing required key");
            }
            None
        }
    };
    let record_every = match r.uint("run", "record_every") {
        Some(0) => {
            r.err("run.record_every", "must be at least 1");
            None
        }
        Some(k) => Some(k as usize),
        None => iterations.map(default_record_every),
    };
    let replications = match r.uint("run", "replications").unwrap_or(1) {
        0 => {
            r.err("run.replications", "must be at least 1");
            None
        }
        s => Some(s as usize),
    };
    let master_seed = r.uint("run", "master_seed").unwrap_or(0);
    let algorithm: Option<Algorithm> = r.parsed("run", "algorithm", Some(Algorithm::Auto));

    let init = match r.str("init", "kind").unwrap_or("random") {
        "point" => match (r.has("init", "point"), r.has("init", "value")) {
            (true, false) => r.vector("init", "point", dim).map(InitSpec::Point),
            (false, true) => r.vector("init", "value", dim).map(InitSpec::Point),
            _ => {
                r.err("init.point", "give exactly one of init.point and init.value");
                None
            }
        },
        "random" => {
            let seed = r.uint("init", "seed").unwrap_or(0);
            let per_replication = r.bool("init", "per_replication").unwrap_or(false);
            let region = match (r.has("init", "lo"), r.has("init", "hi")) {
                (false, false) => Some(None),
                (true, true) => match (r.vector("init", "lo", dim), r.vector("init", "hi", dim)) {
                    (Some(lo), Some(hi)) if lo.iter().zip(&hi).all(|(a, b)| a <= b) => Some(Some((lo, hi))),
                    (Some(_), Some(_)) => {
                        r.err("init.hi", "every upper bound must be at least the lower bound");
                        None
                    }
                    _ => None,
                },
                _ => {
                    r.err("init.lo", "give both init.lo and init.hi or neither");
                    None
                }
            };
            region.map(|region| InitSpec::Random {
                seed,
                per_replication,
                region,
            })
        }
        other => {
            r.err(
                "init.kind",
                format!("unknown init `{other}` (expected point or random)"),
            );
            None
        }
    };

    let vc_grid_per_axis = match r.uint("vc", "grid_per_axis").unwrap_or(DEFAULT_GRID_PER_AXIS as u64) {
        g if g < 2 => {
            r.err("vc.grid_per_axis", "must be at least 2");
            None
        }
        g => Some(g as usize),
    };
    let vc_tolerance = r.float("vc", "tolerance").unwrap_or(DEFAULT_VC_TOLERANCE);
    if !(vc_tolerance >= 0.0 && vc_tolerance.is_finite()) {
        r.err("vc.tolerance", "must be non-negative and finite");
    }

    // Cross-field checks.
    if let (Some(set), Some(d)) = (&set, dim) {
        if let Err(e) = set.build(d) {
            r.err("set.kind", e.to_string());
        }
    }
    if let (Some(DelayModel::Constant { d }), Some(Architecture::SharedMemory), Some(k)) = (delay, arch, workers) {
        if d >= k {
            r.err(
                "delay.d",
                format!(
                    "shared memory allows each iterate at most K={k} reads; constant delay {d} needs {}",
                    d + 1
                ),
            );
        }
    }
    if algorithm == Some(Algorithm::Threaded) {
        if arch != Some(Architecture::SharedMemory) {
            r.err("run.arch", "threaded runs record shared_memory traces");
        }
        if delay.is_some_and(|m| m != DelayModel::None) {
            r.err("delay.kind", "threaded runs realize delays by thread timing; use none");
        }
    }
    if algorithm == Some(Algorithm::Dagd) && noise.is_some_and(|n| !n.is_none()) {
        r.err("noise.kind", "the dagd algorithm requires noise = none");
    }
    if algorithm == Some(Algorithm::Unconstrained) && !matches!(set, Some(SetSpec::AllSpace)) {
        r.err("set.kind", "the unconstrained algorithm requires all_space");
    }
    if algorithm == Some(Algorithm::Projected) && matches!(set, Some(SetSpec::AllSpace)) {
        r.err("set.kind", "the projected algorithm requires a box or ball");
    }

    if !r.errors.is_empty() {
        return Err(SpecErrors(r.errors));
    }
    Ok(ExperimentSpec {
        objective: objective.unwrap(),
        dim: dim.unwrap(),
        noise: noise.unwrap(),
        set: set.unwrap(),
        schedule: schedule.unwrap(),
        delay: delay.unwrap(),
        arch: arch.unwrap(),
        workers: workers.unwrap(),
        iterations: iterations.unwrap(),
        record_every: record_every.unwrap(),
        replications: replications.unwrap(),
        master_seed,
        algorithm: algorithm.unwrap(),
        init: init.unwrap(),
        vc_grid_per_axis: vc_grid_per_axis.unwrap(),
        vc_tolerance,
    })
}

fn parse_delay(r: &mut Reader<'_>) -> Option<DelayModel> {
    let kind = r.str("delay", "kind").unwrap_or("none");
    let allowed: &[&str] = match kind {
        "none" | "round_robin" => &[],
        "constant" => &["d"],
        "sublinear" => &["p", "k_coef"],
        "linear" => &["k_coef"],
        "polynomial" => &["q", "k_coef"],
        "random_linear" => &["rate", "jitter_seed"],
        other => {
            r.err(
                "delay.kind",
                format!("unknown delay model `{other}` (expected none, constant, round_robin, sublinear, linear, polynomial or random_linear)"),
            );
            return None;
        }
    };
    for key in ["d", "p", "q", "k_coef", "rate", "jitter_seed"] {
        if r.has("delay", key) && !allowed.contains(&key) {
            r.err(&format!("delay.{key}"), format!("not a parameter of {kind} delays"));
        }
    }
    let k_coef = r.float("delay", "k_coef").unwrap_or(1.0);
    let model = match kind {
        "none" => DelayModel::None,
        "round_robin" => DelayModel::RoundRobin,
        "constant" => match r.uint("delay", "d") {
            Some(d) => DelayModel::Constant { d: d as usize },
            None => {
                if !r.has("delay", "d") {
                    r.err("delay.d", "missing required key for constant delays");
                }
                return None;
            }
        },
        "sublinear" => {
            let p = r.float("delay", "p");
            if p.is_none() && !r.has("delay", "p") {
                r.err("delay.p", "missing required key for sublinear delays");
            }
            DelayModel::Sublinear { p: p?, k_coef }
        }
        "linear" => DelayModel::Linear { k_coef },
        "polynomial" => {
            let q = r.float("delay", "q");
            if q.is_none() && !r.has("delay", "q") {
                r.err("delay.q", "missing required key for polynomial delays");
            }
            DelayModel::Polynomial { q: q?, k_coef }
        }
        _ => DelayModel::RandomLinear {
            rate: r.float("delay", "rate").unwrap_or(0.1),
            jitter_seed: r.uint("delay", "jitter_seed").unwrap_or(0),
        },
    };
    if let Err(e) = model.validate() {
        let msg = e.to_string();
        let msg = msg.trim_start_matches("invalid delay model: ").to_string();
        let key = match model {
            DelayModel::Sublinear { p, .. } if !(p > 0.0 && p < 1.0) => "delay.p",
            DelayModel::Polynomial { q, .. } if !(q >= 1.0 && q.is_finite()) => "delay.q",
            DelayModel::RandomLinear { .. } => "delay.rate",
            _ => "delay.k_coef",
        };
        r.err(key, msg);
        return None;
    }
    Some(model)
}

fn float_list(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

fn seed_value(s: u64) -> Value {
    match i64::try_from(s) {
        Ok(i) => Value::Integer(i),
        Err(_) => Value::String(s.to_string()),
    }
}

/// Writes a spec back out with every default made explicit.
pub fn to_text(spec: &ExperimentSpec) -> String {
    let mut root = Table::new();
    let mut section = |name: &str, entries: Vec<(&str, Value)>| {
        let t: Table = entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        root.insert(name.to_string(), Value::Table(t));
    };
    section(
        "objective",
        vec![
            ("name", Value::String(spec.objective.as_str().into())),
            ("dim", Value::Integer(spec.dim as i64)),
        ],
    );
    section(
        "noise",
        match spec.noise {
            NoiseModel::None => vec![("kind", Value::String("none".into()))],
            NoiseModel::GaussianAdditive { sigma } => {
                vec![
                    ("kind", Value::String("gaussian".into())),
                    ("sigma", Value::Float(sigma)),
                ]
            }
        },
    );
    section(
        "set",
        match &spec.set {
            SetSpec::AllSpace => vec![("kind", Value::String("all_space".into()))],
            SetSpec::Box { lo, hi } => {
                vec![
                    ("kind", Value::String("box".into())),
                    ("lo", float_list(lo)),
                    ("hi", float_list(hi)),
                ]
            }
            SetSpec::Ball { center, radius } => vec![
                ("kind", Value::String("ball".into())),
                ("center", float_list(center)),
                ("radius", Value::Float(*radius)),
            ],
        },
    );
    section(
        "schedule",
        vec![
            ("kind", Value::String(spec.schedule.kind.as_str().into())),
            ("c", Value::Float(spec.schedule.c)),
            ("offset", Value::Integer(spec.schedule.offset as i64)),
        ],
    );
    let kind = Value::String(spec.delay.name().into());
    section(
        "delay",
        match spec.delay {
            DelayModel::None | DelayModel::RoundRobin => vec![("kind", kind)],
            DelayModel::Constant { d } => vec![("kind", kind), ("d", Value::Integer(d as i64))],
            DelayModel::Sublinear { p, k_coef } => {
                vec![("kind", kind), ("p", Value::Float(p)), ("k_coef", Value::Float(k_coef))]
            }
            DelayModel::Linear { k_coef } => vec![("kind", kind), ("k_coef", Value::Float(k_coef))],
            DelayModel::Polynomial { q, k_coef } => {
                vec![("kind", kind), ("q", Value::Float(q)), ("k_coef", Value::Float(k_coef))]
            }
            DelayModel::RandomLinear { rate, jitter_seed } => {
                vec![
                    ("kind", kind),
                    ("rate", Value::Float(rate)),
                    ("jitter_seed", seed_value(jitter_seed)),
                ]
            }
        },
    );
    section(
        "run",
        vec![
            ("arch", Value::String(spec.arch.as_str().into())),
            ("workers", Value::Integer(spec.workers as i64)),
            ("iterations", Value::Integer(spec.iterations as i64)),
            ("record_every", Value::Integer(spec.record_every as i64)),
            ("replications", Value::Integer(spec.replications as i64)),
            ("master_seed", seed_value(spec.master_seed)),
            ("algorithm", Value::String(spec.algorithm.as_str().into())),
        ],
    );
    section(
        "init",
        match &spec.init {
            InitSpec::Point(p) => vec![("kind", Value::String("point".into())), ("point", float_list(p))],
            InitSpec::Random {
                seed,
                per_replication,
                region,
            } => {
                let mut v = vec![
                    ("kind", Value::String("random".into())),
                    ("seed", seed_value(*seed)),
                    ("per_replication", Value::Boolean(*per_replication)),
                ];
                if let Some((lo, hi)) = region {
                    v.push(("lo", float_list(lo)));
                    v.push(("hi", float_list(hi)));
                }
                v
            }
        },
    );
    section(
        "vc",
        vec![
            ("grid_per_axis", Value::Integer(spec.vc_grid_per_axis as i64)),
            ("tolerance", Value::Float(spec.vc_tolerance)),
        ],
    );
    toml::to_string(&root).expect("tables of plain values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[objective]
name = "quadratic"
dim = 2

[schedule]
kind = "inv_n"

[run]
iterations = 100
"#;

    #[test]
    fn minimal_spec_gets_defaults() {
        let s = parse_spec(MINIMAL).unwrap();
        assert_eq!(s.objective, TestFunction::Quadratic);
        assert_eq!(s.noise, NoiseModel::None);
        assert_eq!(s.set, SetSpec::AllSpace);
        assert_eq!(s.schedule, StepSchedule::inv_n(1.0));
        assert_eq!(s.delay, DelayModel::None);
        assert_eq!(s.arch, Architecture::MasterWorker);
        assert_eq!(s.workers, DEFAULT_WORKERS);
        assert_eq!(s.record_every, 1);
        assert_eq!(s.replications, 1);
        assert_eq!(s.master_seed, 0);
        assert_eq!(
            s.init,
            InitSpec::Random {
                seed: 0,
                per_replication: false,
                region: None
            }
        );
        assert_eq!(s.vc_grid_per_axis, DEFAULT_GRID_PER_AXIS);
    }

    #[test]
    fn sublinear_p_out_of_range() {
        let text = format!("{MINIMAL}\n[delay]\nkind = \"sublinear\"\np = 1.5\n");
        let errs = parse_spec(&text).unwrap_err();
        assert_eq!(
            errs.0,
            vec![SpecError {
                key: "delay.p".into(),
                message: "p must lie in (0,1)".into()
            }]
        );
    }

    #[test]
    fn every_problem_is_reported_with_its_key() {
        let text = r#"
[objective]
name = "beale"
dim = 3
colour = "red"

[schedule]
kind = "inv_cubed"

[run]
workers = 0

[extra]
x = 1
"#;
        let errs = parse_spec(text).unwrap_err();
        let keys: Vec<&str> = errs.0.iter().map(|e| e.key.as_str()).collect();
        for k in [
            "objective.colour",
            "extra",
            "objective.dim",
            "schedule.kind",
            "run.workers",
            "run.iterations",
        ] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn scalar_bounds_broadcast() {
        let text = format!("{MINIMAL}\n[set]\nkind = \"box\"\nlo = -1\nhi = [1.0, 2.0]\n");
        let s = parse_spec(&text).unwrap();
        assert_eq!(
            s.set,
            SetSpec::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 2.0]
            }
        );
        let bad = format!("{MINIMAL}\n[set]\nkind = \"box\"\nlo = [0.0]\nhi = 1\n");
        assert_eq!(parse_spec(&bad).unwrap_err().0[0].key, "set.lo");
    }

    #[test]
    fn round_trip() {
        let text = r#"
[objective]
name = "rosenbrock"
dim = 3
[noise]
kind = "gaussian"
sigma = 0.1
[set]
kind = "box"
lo = 0
hi = 2
[schedule]
kind = "inv_nlogn"
c = 1e-3
[delay]
kind = "random_linear"
rate = 0.25
jitter_seed = "18446744073709551615"
[run]
iterations = 200000
replications = 3
master_seed = 9
[init]
kind = "random"
lo = [0.5, 0.5, 0.5]
hi = 1.5
"#;
        let s = parse_spec(text).unwrap();
        assert_eq!(s.record_every, 10);
        let again = parse_spec(&to_text(&s)).unwrap();
        assert_eq!(again, s);
        assert_eq!(to_text(&again), to_text(&s));
    }

    #[test]
    fn threaded_requires_shared_memory() {
        let text = format!("{MINIMAL}\n[delay]\nkind = \"linear\"\n");
        let text = text.replace("iterations = 100", "iterations = 100\nalgorithm = \"threaded\"");
        let keys: Vec<String> = parse_spec(&text).unwrap_err().0.into_iter().map(|e| e.key).collect();
        assert_eq!(keys, vec!["run.arch", "delay.kind"]);
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert_eq!(parse_spec("[objective\nname=").unwrap_err().0[0].key, "<document>");
    }
}
