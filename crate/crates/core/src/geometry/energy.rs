use super::FeasibleSet;
use crate::error::{check_dim, Error, Result};
use crate::objectives::{dist_sq, dot, norm_sq};

/// Feasible set plus a finite list of solution representatives; evaluates
/// `E(y) = min_{x*} ‖x*‖² − ‖Π(y)‖² + 2⟨y, Π(y) − x*⟩`.
///
/// When the solution set is a continuum and only a sample is listed, the
/// minimum over the sample upper-bounds the true infimum.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyContext {
    set: FeasibleSet,
    optima: Vec<Vec<f64>>,
}

const FEASIBILITY_TOL: f64 = 1e-12;

impl EnergyContext {
    pub fn new(set: FeasibleSet, optima: Vec<Vec<f64>>) -> Result<Self> {
        if optima.is_empty() {
            return Err(Error::InvalidSet("energy needs at least one optimum".into()));
        }
        for x in &optima {
            check_dim(set.dim(), x.len())?;
            let p = set.project(x)?;
            if dist_sq(&p, x).sqrt() > FEASIBILITY_TOL {
                return Err(Error::InvalidSet(format!(
                    "optimum {x:?} lies outside the feasible set"
                )));
            }
        }
        Ok(EnergyContext { set, optima })
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn optima(&self) -> &[Vec<f64>] {
        &self.optima
    }

    /// `E(y)`; never negative beyond rounding.
    pub fn energy(&self, y: &[f64]) -> f64 {
        let p = self.projected(y);
        self.optima
            .iter()
            .map(|xs| energy_with_projection(xs, y, &p))
            .fold(f64::INFINITY, f64::min)
    }

    /// `E_{x*}(y)` for one representative.
    pub fn energy_wrt(&self, xstar: &[f64], y: &[f64]) -> f64 {
        let p = self.projected(y);
        energy_with_projection(xstar, y, &p)
    }

    /// Energy when `Π(y)` is already known.
    pub(crate) fn energy_projected(&self, y: &[f64], p: &[f64]) -> f64 {
        self.optima
            .iter()
            .map(|xs| energy_with_projection(xs, y, p))
            .fold(f64::INFINITY, f64::min)
    }

    fn projected(&self, y: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.set.dim()];
        self.set.project_into(y, &mut p);
        p
    }
}

// ‖x*‖² − ‖p‖² + 2⟨y, p − x*⟩ rewritten as ‖p − x*‖² + 2⟨y − p, p − x*⟩, which
// avoids cancellation when y is far from the set.
fn energy_with_projection(xstar: &[f64], y: &[f64], p: &[f64]) -> f64 {
    let mut sq = 0.0;
    let mut cross = 0.0;
    for i in 0..p.len() {
        let d = p[i] - xstar[i];
        sq += d * d;
        cross += (y[i] - p[i]) * d;
    }
    sq + 2.0 * cross
}

/// Slack in the perturbation bound
/// `E_{x*}(y + Δy) − E_{x*}(y) ≤ 2⟨Δy, Π(y) − x*⟩ + ‖Δy‖²`:
/// returns right-hand side minus left-hand side, which is never negative
/// beyond rounding.
pub fn energy_perturbation_gap(ctx: &EnergyContext, xstar: &[f64], y: &[f64], dy: &[f64]) -> Result<f64> {
    let dim = ctx.set.dim();
    check_dim(dim, xstar.len())?;
    check_dim(dim, y.len())?;
    check_dim(dim, dy.len())?;
    if !ctx.optima.iter().any(|o| o.as_slice() == xstar) {
        return Err(Error::InvalidSet(format!("{xstar:?} is not one of the listed optima")));
    }
    let p = ctx.projected(y);
    let shifted: Vec<f64> = y.iter().zip(dy).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = p.iter().zip(xstar).map(|(a, b)| a - b).collect();
    let bound = 2.0 * dot(dy, &diff) + norm_sq(dy);
    let change = ctx.energy_wrt(xstar, &shifted) - energy_with_projection(xstar, y, &p);
    Ok(bound - change)
}
