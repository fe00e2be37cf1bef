//! Feasible sets and Euclidean projection, the energy function built on them,
//! and the mean-field flow `ẏ = −∇f(Π(y))`.

mod energy;
mod flow;

pub use energy::{energy_perturbation_gap, EnergyContext};
pub use flow::{integrate_flow, FlowPoint, DEFAULT_FLOW_DT};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    AllSpace,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// A closed convex set with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
    dim: usize,
}

impl FeasibleSet {
    pub fn all_space(dim: usize) -> Self {
        FeasibleSet {
            kind: SetKind::AllSpace,
            dim,
        }
    }

    /// Axis-aligned box; requires `lo < hi` componentwise.
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidSet(format!(
                "box bounds must be non-empty and of equal length (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::InvalidSet(format!(
                "box needs finite lo < hi, violated at coordinate {i} ({} vs {})",
                lo[i], hi[i]
            )));
        }
        let dim = lo.len();
        Ok(FeasibleSet {
            kind: SetKind::Box { lo, hi },
            dim,
        })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(vec![lo; dim], vec![hi; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidSet("ball center must be non-empty".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        let dim = center.len();
        Ok(FeasibleSet {
            kind: SetKind::Ball { center, radius },
            dim,
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![0.0; dim.max(1)], 1.0).expect("unit ball is valid")
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, SetKind::AllSpace)
    }

    /// Euclidean diameter; `None` for the whole space.
    pub fn diameter(&self) -> Option<f64> {
        match &self.kind {
            SetKind::AllSpace => None,
            SetKind::Box { lo, hi } => Some(lo.iter().zip(hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()),
            SetKind::Ball { radius, .. } => Some(2.0 * radius),
        }
    }

    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            SetKind::AllSpace => None,
            SetKind::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            SetKind::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
        }
    }

    /// Membership up to an absolute slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match &self.kind {
            SetKind::AllSpace => x.iter().all(|v| v.is_finite()),
            SetKind::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            SetKind::Ball { center, radius } => crate::objectives::dist_sq(x, center).sqrt() <= radius + tol,
        }
    }

    /// `Π(y)`, the closest point of the set to `y`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        let mut out = vec![0.0; self.dim];
        self.project_into(y, &mut out);
        Ok(out)
    }

    /// Unchecked projection into a caller-provided buffer of length `dim`.
    pub fn project_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            SetKind::AllSpace => out.copy_from_slice(y),
            SetKind::Box { lo, hi } => {
                for i in 0..y.len() {
                    out[i] = y[i].clamp(lo[i], hi[i]);
                }
            }
            SetKind::Ball { center, radius } => {
                let dist = crate::objectives::dist_sq(y, center).sqrt();
                if dist <= *radius {
                    out.copy_from_slice(y);
                } else {
                    let scale = radius / dist;
                    for i in 0..y.len() {
                        out[i] = center[i] + scale * (y[i] - center[i]);
                    }
                }
            }
        }
    }

    /// A uniform draw from the set; for the whole space, a uniform draw from
    /// `[-1, 1]^dim`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            SetKind::AllSpace => (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            SetKind::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| rng.random_range(*l..=*h)).collect(),
            SetKind::Ball { center, radius } => {
                let dir: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = crate::objectives::norm_sq(&dir).sqrt().max(f64::MIN_POSITIVE);
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / self.dim as f64);
                center.iter().zip(&dir).map(|(c, d)| c + r * d / norm).collect()
            }
        }
    }
}
