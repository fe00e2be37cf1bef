use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const TRACE_CSV_HEADER: &str = "n,s_n,noise_seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Workers send gradients to a master that owns the iterate. Every
    /// iterate after the initial one is handed to exactly one worker.
    MasterWorker,
    /// Processors read and atomically update a shared iterate. The same
    /// iterate may be read by up to `K` processors.
    SharedMemory,
}

impl Architecture {
    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::MasterWorker => "master_worker",
            Architecture::SharedMemory => "shared_memory",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "master_worker" => Ok(Architecture::MasterWorker),
            "shared_memory" => Ok(Architecture::SharedMemory),
            _ => Err(format!(
                "unknown architecture `{s}` (expected master_worker or shared_memory)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    /// Global iteration.
    pub n: usize,
    /// `s(n)`: the iteration whose iterate the applied gradient was computed at.
    pub source: usize,
    pub noise_seed: u64,
}

impl TraceEntry {
    pub fn delay(&self) -> usize {
        self.n.saturating_sub(self.source)
    }
}

/// The realized asynchrony of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub arch: Architecture,
    /// Number of workers (`K`).
    pub workers: usize,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn new(arch: Architecture, workers: usize, entries: Vec<TraceEntry>) -> Self {
        Trace { arch, workers, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.source)
    }

    pub fn max_delay(&self) -> usize {
        self.entries.iter().map(TraceEntry::delay).max().unwrap_or(0)
    }

    /// Writes `n,s_n,noise_seed` rows as decimal integers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.n, e.source, e.noise_seed)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`Trace::write_csv`]. The file carries no
    /// architecture or worker count, so the caller supplies them.
    pub fn read_csv<R: BufRead>(input: R, arch: Architecture, workers: usize) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedTrace("empty file".into()))??;
        if header.trim() != TRACE_CSV_HEADER {
            return Err(Error::MalformedTrace(format!(
                "expected header `{TRACE_CSV_HEADER}`, found `{}`",
                header.trim()
            )));
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::MalformedTrace(format!(
                    "line {lineno}: expected 3 fields, found {}",
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::MalformedTrace(format!("line {lineno}: bad {what} `{s}`: {e}")))
            };
            entries.push(TraceEntry {
                n: parse(fields[0], "n")? as usize,
                source: parse(fields[1], "s_n")? as usize,
                noise_seed: parse(fields[2], "noise_seed")?,
            });
        }
        Ok(Trace::new(arch, workers, entries))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceRule {
    /// Entry `i` must have `n = i`.
    NotDense,
    /// `s(n) > n`.
    SourceAfterIteration,
    /// Master-worker: an iterate other than the initial one was used twice.
    RepeatedSource,
    /// Shared memory: an iterate was used by more than `K` updates.
    MultiplicityExceeded,
    /// `K = 0`.
    NoWorkers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceViolation {
    pub index: usize,
    pub rule: TraceRule,
}

impl fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            TraceRule::NotDense => write!(f, "n out of sequence at index {}", self.index),
            TraceRule::SourceAfterIteration => write!(f, "s(n) > n at index {}", self.index),
            TraceRule::RepeatedSource => {
                write!(f, "source reused after warm-up at index {}", self.index)
            }
            TraceRule::MultiplicityExceeded => write!(f, "multiplicity exceeded at index {}", self.index),
            TraceRule::NoWorkers => write!(f, "trace declares zero workers"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceReport {
    pub violations: Vec<TraceViolation>,
}

impl TraceReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every structural rule of a trace; never aborts.
///
/// Master-worker traces may reuse the initial iterate (all workers start from
/// it); every later source must be used at most once. Shared-memory traces may
/// use any source, including the initial one, at most `K` times.
pub fn validate_trace(trace: &Trace) -> TraceReport {
    let mut violations = Vec::new();
    if trace.workers == 0 {
        violations.push(TraceViolation {
            index: 0,
            rule: TraceRule::NoWorkers,
        });
    }
    let mut uses: HashMap<usize, usize> = HashMap::new();
    for (i, e) in trace.entries.iter().enumerate() {
        if e.n != i {
            violations.push(TraceViolation {
                index: i,
                rule: TraceRule::NotDense,
            });
        }
        if e.source > e.n {
            violations.push(TraceViolation {
                index: i,
                rule: TraceRule::SourceAfterIteration,
            });
        }
        let count = uses.entry(e.source).or_insert(0);
        *count += 1;
        match trace.arch {
            Architecture::MasterWorker => {
                if e.source != 0 && *count == 2 {
                    violations.push(TraceViolation {
                        index: i,
                        rule: TraceRule::RepeatedSource,
                    });
                }
            }
            Architecture::SharedMemory => {
                if *count == trace.workers + 1 {
                    violations.push(TraceViolation {
                        index: i,
                        rule: TraceRule::MultiplicityExceeded,
                    });
                }
            }
        }
    }
    TraceReport { violations }
}
