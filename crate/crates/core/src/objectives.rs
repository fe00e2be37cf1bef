//! Stochastic objectives `f(x) = E[F(x; ω)]`, the bundled test functions and
//! the gradient oracles used by the runners.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::geometry::FeasibleSet;

/// Inner products within this band of zero count as equality in
/// [`check_vc_on_grid`].
pub const DEFAULT_VC_TOLERANCE: f64 = 1e-9;

/// A smooth objective with an analytic mean gradient.
///
/// Implementors only need `dim`, `value` and `gradient_into`; the remaining
/// methods describe what is known about the solution set and default to
/// "unknown". Methods take slices of length `dim()` and may panic otherwise;
/// use [`evaluate`] and [`mean_gradient`] for checked access.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }

    fn name(&self) -> &str {
        "custom"
    }

    /// Lipschitz constant of the gradient, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }

    /// Representatives of the solution set (a finite sample when the set is a
    /// continuum).
    fn optima(&self) -> &[Vec<f64>] {
        &[]
    }

    fn min_value(&self) -> Option<f64> {
        None
    }
}

/// `f(x)` with a dimension check.
pub fn evaluate(obj: &dyn Objective, x: &[f64]) -> Result<f64> {
    check_dim(obj.dim(), x.len())?;
    Ok(obj.value(x))
}

/// `∇f(x)` with a dimension check.
pub fn mean_gradient(obj: &dyn Objective, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    Ok(obj.gradient(x))
}

/// The bundled test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// `Σ 1000 (x_{i+1} − x_i²)² + (1 − x_i)²`, minimum at `(1, …, 1)`.
    Rosenbrock,
    /// The two-dimensional Beale function, minimum at `(3, 0.5)`.
    Beale,
    /// `(3 + sin 5θ + cos 3θ) r² (5/3 − r)` in polar coordinates, minimum at 0
    /// on the unit ball.
    Polar,
    /// `‖x‖²`.
    Quadratic,
    /// `(‖x‖² − 1)²`; its solution set is the unit sphere and the origin is a
    /// critical point outside it.
    DoubleWell,
}

impl TestFunction {
    pub const ALL: [TestFunction; 5] = [
        TestFunction::Rosenbrock,
        TestFunction::Beale,
        TestFunction::Polar,
        TestFunction::Quadratic,
        TestFunction::DoubleWell,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestFunction::Rosenbrock => "rosenbrock",
            TestFunction::Beale => "beale",
            TestFunction::Polar => "polar",
            TestFunction::Quadratic => "quadratic",
            TestFunction::DoubleWell => "double_well",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        TestFunction::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| {
            format!("unknown objective `{s}` (expected rosenbrock, beale, polar, quadratic or double_well)")
        })
    }
}

/// One of the bundled [`TestFunction`]s at a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TestObjective {
    function: TestFunction,
    dim: usize,
    optima: Vec<Vec<f64>>,
}

const ROSENBROCK_COUPLING: f64 = 1000.0;

/// Builds a bundled objective, rejecting unsupported `(function, dim)` pairs.
pub fn make_test_objective(function: TestFunction, dim: usize) -> Result<TestObjective> {
    let unsupported = |reason: &str| Error::UnsupportedObjective {
        name: function.as_str().to_string(),
        dim,
        reason: reason.to_string(),
    };
    let optima = match function {
        TestFunction::Rosenbrock => {
            if dim < 2 {
                return Err(unsupported("rosenbrock needs dim >= 2"));
            }
            vec![vec![1.0; dim]]
        }
        TestFunction::Beale => {
            if dim != 2 {
                return Err(unsupported("beale is two-dimensional"));
            }
            vec![vec![3.0, 0.5]]
        }
        TestFunction::Polar => {
            if dim != 2 {
                return Err(unsupported("polar is two-dimensional"));
            }
            vec![vec![0.0, 0.0]]
        }
        TestFunction::Quadratic => {
            if dim == 0 {
                return Err(unsupported("dim must be positive"));
            }
            vec![vec![0.0; dim]]
        }
        TestFunction::DoubleWell => {
            if dim == 0 {
                return Err(unsupported("dim must be positive"));
            }
            unit_sphere_sample(dim)
        }
    };
    Ok(TestObjective { function, dim, optima })
}

/// Finite sample of the unit sphere: `±e_i`, plus 64 evenly spaced angles in
/// two dimensions or the normalised sign vectors up to dimension 8.
fn unit_sphere_sample(dim: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    if dim == 2 {
        for k in 0..64 {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            pts.push(vec![t.cos(), t.sin()]);
        }
        return pts;
    }
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            pts.push(e);
        }
    }
    if (3..=8).contains(&dim) {
        let scale = 1.0 / (dim as f64).sqrt();
        for mask in 0u32..(1 << dim) {
            pts.push(
                (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { -scale } else { scale })
                    .collect(),
            );
        }
    }
    pts
}

impl TestObjective {
    pub fn function(&self) -> TestFunction {
        self.function
    }
}

impl Objective for TestObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        self.function.as_str()
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self.function {
            TestFunction::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = 1.0 - w[0];
                    ROSENBROCK_COUPLING * a * a + b * b
                })
                .sum(),
            TestFunction::Beale => {
                let [t1, t2, t3] = beale_terms(x[0], x[1]);
                t1 * t1 + t2 * t2 + t3 * t3
            }
            TestFunction::Polar => {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    return 0.0;
                }
                let theta = x[1].atan2(x[0]);
                polar_angular(theta) * r * r * (5.0 / 3.0 - r)
            }
            TestFunction::Quadratic => norm_sq(x),
            TestFunction::DoubleWell => {
                let s = norm_sq(x) - 1.0;
                s * s
            }
        }
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self.function {
            TestFunction::Rosenbrock => {
                out.iter_mut().for_each(|g| *g = 0.0);
                for i in 0..x.len() - 1 {
                    let a = x[i + 1] - x[i] * x[i];
                    out[i] += -4.0 * ROSENBROCK_COUPLING * x[i] * a - 2.0 * (1.0 - x[i]);
                    out[i + 1] += 2.0 * ROSENBROCK_COUPLING * a;
                }
            }
            TestFunction::Beale => {
                let (x1, x2) = (x[0], x[1]);
                let [t1, t2, t3] = beale_terms(x1, x2);
                out[0] = 2.0 * t1 * (x2 - 1.0) + 2.0 * t2 * (x2 * x2 - 1.0) + 2.0 * t3 * (x2 * x2 * x2 - 1.0);
                out[1] = 2.0 * t1 * x1 + 4.0 * t2 * x1 * x2 + 6.0 * t3 * x1 * x2 * x2;
            }
            TestFunction::Polar => {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    // removable singularity: f = O(r²)
                    out[0] = 0.0;
                    out[1] = 0.0;
                    return;
                }
                let theta = x[1].atan2(x[0]);
                // ∇f = g(θ) h'(r)/r · x + h(r)/r² · g'(θ) · (−x₂, x₁)
                // with h(r) = r²(5/3 − r).
                let radial = polar_angular(theta) * (10.0 / 3.0 - 3.0 * r);
                let tangential = (5.0 / 3.0 - r) * polar_angular_deriv(theta);
                out[0] = radial * x[0] - tangential * x[1];
                out[1] = radial * x[1] + tangential * x[0];
            }
            TestFunction::Quadratic => {
                for (g, xi) in out.iter_mut().zip(x) {
                    *g = 2.0 * xi;
                }
            }
            TestFunction::DoubleWell => {
                let s = 4.0 * (norm_sq(x) - 1.0);
                for (g, xi) in out.iter_mut().zip(x) {
                    *g = s * xi;
                }
            }
        }
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        match self.function {
            TestFunction::Quadratic => Some(2.0),
            _ => None,
        }
    }

    fn optima(&self) -> &[Vec<f64>] {
        &self.optima
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

fn beale_terms(x1: f64, x2: f64) -> [f64; 3] {
    [
        1.5 - x1 + x1 * x2,
        2.25 - x1 + x1 * x2 * x2,
        2.625 - x1 + x1 * x2 * x2 * x2,
    ]
}

fn polar_angular(theta: f64) -> f64 {
    3.0 + (5.0 * theta).sin() + (3.0 * theta).cos()
}

fn polar_angular_deriv(theta: f64) -> f64 {
    5.0 * (5.0 * theta).cos() - 3.0 * (3.0 * theta).sin()
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Central-difference gradient with step `h = 1e-6 · max(1, ‖x‖∞)`.
pub fn finite_difference_gradient(obj: &dyn Objective, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = 1e-6 * scale;
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = obj.value(&probe);
            probe[i] = x[i] - h;
            let down = obj.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect())
}

/// `‖∇f(x) − ∇_h f(x)‖∞ / max(1, ‖∇_h f(x)‖∞)` against central differences.
pub fn gradient_check(obj: &dyn Objective, x: &[f64]) -> Result<f64> {
    let fd = finite_difference_gradient(obj, x)?;
    let g = obj.gradient(x);
    let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = fd.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(err / scale)
}

/// How sampled gradients deviate from the mean gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    /// `∇F(x; ω) = ∇f(x) + σ ω` with `ω` standard normal.
    GaussianAdditive {
        sigma: f64,
    },
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        NoiseModel::GaussianAdditive { sigma }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseModel::None)
    }

    /// `E‖∇F − ∇f‖²` for a gradient of dimension `dim`.
    pub fn second_moment(&self, dim: usize) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::GaussianAdditive { sigma } => sigma * sigma * dim as f64,
        }
    }

    /// Adds the draw determined by `seed` to `grad` in place.
    pub fn perturb(&self, grad: &mut [f64], seed: u64) {
        if let NoiseModel::GaussianAdditive { sigma } = *self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for g in grad.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *g += sigma * z;
            }
        }
    }
}

/// One draw of `∇F(x; ω)`; `seed` determines `ω` completely.
pub fn sample_gradient(obj: &dyn Objective, noise: &NoiseModel, x: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut g = mean_gradient(obj, x)?;
    noise.perturb(&mut g, seed);
    Ok(g)
}

/// Result of [`check_vc_on_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct VcReport {
    pub checked_points: usize,
    /// Minimum over the grid of `min_{x*} ⟨∇f(x), x − x*⟩`.
    pub min_inner_product: f64,
    pub argmin: Vec<f64>,
    /// Grid points whose inner product falls below `−tolerance`.
    pub violations: Vec<(Vec<f64>, f64)>,
    /// Grid points with `|inner product| ≤ tolerance` that are not within half
    /// a grid cell of a listed optimum.
    pub equality_points_outside_optima: Vec<Vec<f64>>,
}

impl VcReport {
    pub fn is_coherent(&self) -> bool {
        self.violations.is_empty() && self.equality_points_outside_optima.is_empty()
    }
}

const MAX_GRID_POINTS: usize = 50_000_000;

/// Checks `⟨∇f(x), x − x*⟩ ≥ 0` (with equality only on the solution set) for
/// every grid point of `domain` and every listed optimum.
///
/// The grid spans the bounding box of the domain with `grid_per_axis` points
/// per axis; for balls, points outside the ball are skipped.
pub fn check_vc_on_grid(
    obj: &dyn Objective,
    domain: &FeasibleSet,
    grid_per_axis: usize,
    tolerance: f64,
) -> Result<VcReport> {
    check_dim(obj.dim(), domain.dim())?;
    let optima = obj.optima();
    if optima.is_empty() {
        return Err(Error::VcCheck(format!("objective `{}` lists no optima", obj.name())));
    }
    let (lo, hi) = domain
        .bounding_box()
        .ok_or_else(|| Error::VcCheck("domain is unbounded; a grid check needs a box or a ball".into()))?;
    if lo.iter().zip(&hi).any(|(l, h)| !(h > l)) {
        return Err(Error::VcCheck("domain has zero volume".into()));
    }
    if grid_per_axis < 2 {
        return Err(Error::VcCheck("grid_per_axis must be at least 2".into()));
    }
    let dim = obj.dim();
    let total = (grid_per_axis as f64).powi(dim as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::VcCheck(format!(
            "{grid_per_axis}^{dim} grid points exceed the limit of {MAX_GRID_POINTS}"
        )));
    }
    let steps = (grid_per_axis - 1) as f64;
    let cell_sq: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| {
            let half = 0.5 * (h - l) / steps;
            half * half
        })
        .sum();

    let mut report = VcReport {
        checked_points: 0,
        min_inner_product: f64::INFINITY,
        argmin: Vec::new(),
        violations: Vec::new(),
        equality_points_outside_optima: Vec::new(),
    };
    let mut index = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut diff = vec![0.0; dim];
    loop {
        for d in 0..dim {
            x[d] = lo[d] + (hi[d] - lo[d]) * index[d] as f64 / steps;
        }
        if domain.contains(&x, 0.0) {
            report.checked_points += 1;
            obj.gradient_into(&x, &mut grad);
            let value = optima
                .iter()
                .map(|xs| {
                    for d in 0..dim {
                        diff[d] = x[d] - xs[d];
                    }
                    dot(&grad, &diff)
                })
                .fold(f64::INFINITY, f64::min);
            if value < report.min_inner_product {
                report.min_inner_product = value;
                report.argmin = x.clone();
            }
            if value < -tolerance {
                report.violations.push((x.clone(), value));
            } else if value.abs() <= tolerance {
                let near_optimum = optima.iter().any(|xs| dist_sq(&x, xs) <= cell_sq);
                if !near_optimum {
                    report.equality_points_outside_optima.push(x.clone());
                }
            }
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(report);
            }
            index[d] += 1;
            if index[d] < grid_per_axis {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}
