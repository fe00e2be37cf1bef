use super::FeasibleSet;
use crate::error::{check_dim, Error, Result};
use crate::objectives::Objective;

pub const DEFAULT_FLOW_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub t: f64,
    pub y: Vec<f64>,
    /// `Π(y)`.
    pub x: Vec<f64>,
}

/// Integrates `ẏ = −∇f(Π(y))` from `y0` over `[0, horizon]` with classical
/// fixed-step RK4.
///
/// The step is shrunk to `horizon / ⌈horizon / dt⌉` so the last sample lands
/// exactly on `horizon`. Every step is returned, including `t = 0`.
pub fn integrate_flow(
    obj: &dyn Objective,
    set: &FeasibleSet,
    y0: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<Vec<FlowPoint>> {
    let dim = obj.dim();
    check_dim(dim, set.dim())?;
    check_dim(dim, y0.len())?;
    if !(horizon > 0.0) || !(dt > 0.0) || dt > horizon {
        return Err(Error::InvalidRun(format!(
            "flow needs 0 < dt <= horizon (dt = {dt}, horizon = {horizon})"
        )));
    }
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;

    let mut x = vec![0.0; dim];
    let field = |y: &[f64], x: &mut [f64], out: &mut [f64]| {
        set.project_into(y, x);
        obj.gradient_into(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
    };

    let mut y = y0.to_vec();
    set.project_into(&y, &mut x);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(FlowPoint {
        t: 0.0,
        y: y.clone(),
        x: x.clone(),
    });

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for step in 1..=steps {
        field(&y, &mut x, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        field(&tmp, &mut x, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        field(&tmp, &mut x, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        field(&tmp, &mut x, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = if step == steps { horizon } else { step as f64 * h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::FlowDiverged { t });
        }
        set.project_into(&y, &mut x);
        path.push(FlowPoint {
            t,
            y: y.clone(),
            x: x.clone(),
        });
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_test_objective, TestFunction};

    #[test]
    fn equilibrium_stays_put() {
        let f = make_test_objective(TestFunction::Beale, 2).unwrap();
        let set = FeasibleSet::cube(2, -4.0, 4.0).unwrap();
        let path = integrate_flow(&f, &set, &[3.0, 0.5], 2.0, 1e-2).unwrap();
        assert_eq!(path.len(), 201);
        assert!(path.iter().all(|p| p.y == vec![3.0, 0.5]));
        assert_eq!(path.last().unwrap().t, 2.0);
    }

    #[test]
    fn linear_flow_matches_exponential() {
        // ẏ = −2y  ⇒  y(t) = y0 e^{−2t}
        let f = make_test_objective(TestFunction::Quadratic, 3).unwrap();
        let y0 = [1.0, -2.0, 0.5];
        let path = integrate_flow(&f, &FeasibleSet::all_space(3), &y0, 1.0, 1e-3).unwrap();
        let end = path.last().unwrap();
        assert_eq!(end.t, 1.0);
        for (y, y0) in end.y.iter().zip(y0) {
            assert!((y - y0 * (-2.0f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn bad_steps_are_rejected() {
        let f = make_test_objective(TestFunction::Quadratic, 1).unwrap();
        let s = FeasibleSet::all_space(1);
        assert!(integrate_flow(&f, &s, &[1.0], 1.0, 2.0).is_err());
        assert!(integrate_flow(&f, &s, &[1.0], 0.0, 0.1).is_err());
        assert!(integrate_flow(&f, &s, &[1.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        // dt·L far beyond the RK4 stability region
        let f = make_test_objective(TestFunction::Rosenbrock, 2).unwrap();
        let s = FeasibleSet::all_space(2);
        let err = integrate_flow(&f, &s, &[3.0, -3.0], 50.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::FlowDiverged { .. }));
    }
}
