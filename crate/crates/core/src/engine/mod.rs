//! Runners for delayed gradient descent.
//!
//! All runners implement the lazy-projection recursion
//!
//! ```text
//! X_n     = Π(Y_n)
//! Y_{n+1} = Y_n − α_{n+1} ∇F(X_{s(n)}; ω_{n+1})
//! ```
//!
//! with `s(n)` and the noise seed of `ω_{n+1}` read from a [`Trace`]. On the
//! whole space `Π` is the identity and this is plain delayed SGD.

mod logical;
mod threaded;

use std::sync::Arc;
use std::time::Duration;

pub use logical::{run, run_dagd, run_dasgd_projected, run_dasgd_unconstrained};
pub use threaded::{run_threaded, ThreadedConfig};

use crate::asynchrony::{StepSchedule, Trace};
use crate::geometry::{EnergyContext, FeasibleSet};
use crate::objectives::{dist_sq, NoiseModel, Objective};

/// `‖Y‖∞` beyond which a run is flagged divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Clone)]
pub struct RunConfig {
    pub objective: Arc<dyn Objective>,
    pub noise: NoiseModel,
    pub set: FeasibleSet,
    pub schedule: StepSchedule,
    /// Its length is the number of iterations.
    pub trace: Arc<Trace>,
    /// Initial dual point; `X_0 = Π(y0)`.
    pub y0: Vec<f64>,
    pub record_every: usize,
    /// Keep `X_n` at every record point (needed for ergodic averages).
    pub record_iterates: bool,
}

impl RunConfig {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Metrics at one recorded iteration `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordPoint {
    pub n: usize,
    /// `α_{n+1}`, the step applied at iteration `n`.
    pub alpha: f64,
    pub source: usize,
    pub f_value: f64,
    pub grad_norm_sq: f64,
    /// `E(Y_n)`, when the objective lists optima.
    pub energy: Option<f64>,
    pub dist_to_opt: Option<f64>,
    /// `‖∇f(X_{s(n)}) − ∇f(X_n)‖`.
    pub b_norm: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: Vec<RecordPoint>,
    /// `X_n` at each record point, if requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    pub record_every: usize,
    /// `X_N`, or the last finite iterate of a divergent run.
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub trace: Arc<Trace>,
    /// Iteration at which the run was stopped as divergent.
    pub diverged: Option<usize>,
    pub wall_time: Duration,
}

impl RunResult {
    pub fn is_diverged(&self) -> bool {
        self.diverged.is_some()
    }
}

/// Per-run constants for metric evaluation.
pub(crate) struct Metrics<'a> {
    objective: &'a dyn Objective,
    energy: Option<EnergyContext>,
}

impl<'a> Metrics<'a> {
    pub(crate) fn new(objective: &'a dyn Objective, set: &FeasibleSet) -> Self {
        let optima = objective.optima();
        let energy = if optima.is_empty() {
            None
        } else {
            // Optima outside the set (e.g. a box excluding them) leave energy undefined.
            EnergyContext::new(set.clone(), optima.to_vec()).ok()
        };
        Metrics { objective, energy }
    }

    /// `grad_x` is `∇f(x)`, `grad_src` is `∇f(X_{s(n)})`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn point(
        &self,
        n: usize,
        alpha: f64,
        source: usize,
        x: &[f64],
        y: &[f64],
        grad_x: &[f64],
        grad_src: &[f64],
    ) -> RecordPoint {
        let optima = self.objective.optima();
        let dist_to_opt = if optima.is_empty() {
            None
        } else {
            Some(
                optima
                    .iter()
                    .map(|o| dist_sq(x, o))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt(),
            )
        };
        RecordPoint {
            n,
            alpha,
            source,
            f_value: self.objective.value(x),
            grad_norm_sq: grad_x.iter().map(|g| g * g).sum(),
            energy: self.energy.as_ref().map(|e| e.energy_projected(y, x)),
            dist_to_opt,
            b_norm: dist_sq(grad_src, grad_x).sqrt(),
        }
    }
}

pub(crate) fn out_of_bounds(y: &[f64]) -> bool {
    y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD)
}
