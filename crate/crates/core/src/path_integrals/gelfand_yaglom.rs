//! Fluctuation determinant from the initial-value problem
//! `f'' + ω² f = 0`, `f(0) = 0`, `f'(0) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

type C = Complex64;

pub const MIN_GY_STEPS: usize = 100;

/// `f(t)` by the classical fourth-order Runge–Kutta method with fixed step.
pub fn solve_initial_value(omega: f64, t: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let w2 = omega * omega;
    let (mut f, mut g) = (0.0, 1.0);
    for _ in 0..steps {
        let (k1f, k1g) = (g, -w2 * f);
        let (k2f, k2g) = (g + 0.5 * h * k1g, -w2 * (f + 0.5 * h * k1f));
        let (k3f, k3g) = (g + 0.5 * h * k2g, -w2 * (f + 0.5 * h * k2f));
        let (k4f, k4g) = (g + h * k3g, -w2 * (f + h * k3f));
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GelfandYaglom {
    pub f_t: f64,
    /// `√(m / (2πi f(t)))` with `m = e^{2iθ}/ω`.
    pub prefactor: C,
}

pub fn gelfand_yaglom(params: &ModelParams, t: f64, steps: usize) -> Result<GelfandYaglom> {
    if steps < MIN_GY_STEPS {
        return Err(Error::Validation(format!(
            "need at least {MIN_GY_STEPS} steps, got {steps}"
        )));
    }
    let wt = params.omega() * t;
    if !(wt > 0.0 && wt < PI) {
        return Err(Error::BranchWindow(wt));
    }
    let f_t = solve_initial_value(params.omega(), t, steps);
    if (f_t * params.omega()).abs() < params.tol_analytic() {
        return Err(Error::Caustic((f_t * params.omega()).abs()));
    }
    let prefactor = (params.mass() / C::new(0.0, 2.0 * PI * f_t)).sqrt();
    Ok(GelfandYaglom { f_t, prefactor })
}
