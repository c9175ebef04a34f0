//! Feynman lattice for the lagrangian `L = m ẋ²/2 - m ω² x²/2`,
//! `m = e^{2iθ}/ω`.
//!
//! The potential uses trapezoid weights (1/2 at the two end points). Writing
//! `x = x_cl + η` with the lattice classical path splits the Gaussian into
//! `e^{iS_cl}` and a fluctuation factor `√(m / (2πi ε det K))`, where
//! `K = tridiag(-1, 2 - ε²ω², -1)` acts on the `N - 1` interior sites.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::propagators::{AmplitudeResult, Method};

type C = Complex64;

/// `ε det K` for `N` slices of length `ε = t/N`; tends to `sin(ωt)/ω`.
///
/// Fails when a leading minor vanishes or changes sign, i.e. when the
/// lattice has crossed a caustic.
pub fn lattice_determinant(omega: f64, t: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Validation(format!("lattice needs N >= 2, got {n}")));
    }
    let eps = t / n as f64;
    let diag = 2.0 - eps * eps * omega * omega;
    let (mut prev, mut cur) = (1.0, diag);
    if !(cur > 0.0) {
        return Err(Error::SingularLattice(cur));
    }
    for _ in 2..n {
        let next = diag * cur - prev;
        prev = cur;
        cur = next;
        if !(cur > 0.0) {
            return Err(Error::SingularLattice(cur * eps));
        }
    }
    Ok(cur * eps)
}

// Thomas solve of K x = (x_0, 0, ..., 0, x_N) on the interior sites.
fn lattice_classical_path(diag: f64, x_i: f64, x_f: f64, n: usize) -> Vec<f64> {
    let m = n - 1;
    let mut c_prime = vec![0.0; m];
    let mut d_prime = vec![0.0; m];
    for k in 0..m {
        let rhs = (if k == 0 { x_i } else { 0.0 }) + (if k == m - 1 { x_f } else { 0.0 });
        if k == 0 {
            c_prime[0] = -1.0 / diag;
            d_prime[0] = rhs / diag;
        } else {
            let denom = diag + c_prime[k - 1];
            c_prime[k] = -1.0 / denom;
            d_prime[k] = (rhs + d_prime[k - 1]) / denom;
        }
    }
    let mut x = vec![0.0; n + 1];
    x[0] = x_i;
    x[n] = x_f;
    for k in (0..m).rev() {
        let next = if k + 1 < m { x[k + 2] } else { 0.0 };
        x[k + 1] = d_prime[k] - c_prime[k] * next;
    }
    x
}

fn lattice_action(mass: C, omega: f64, eps: f64, x: &[f64]) -> C {
    let n = x.len() - 1;
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for k in 0..n {
        let d = x[k + 1] - x[k];
        kinetic += d * d;
    }
    for (k, xk) in x.iter().enumerate() {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        potential += w * xk * xk;
    }
    mass * (kinetic / (2.0 * eps) - 0.5 * eps * omega * omega * potential)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeResult {
    pub amplitude: AmplitudeResult,
    /// `√(m / (2πi ε det K))`, independent of the boundary data.
    pub fluctuation: C,
    pub classical_action: C,
}

/// Lattice amplitude for an arbitrary complex mass and real frequency.
pub fn lattice_propagator(mass: C, omega: f64, x_f: f64, x_i: f64, t: f64, n: usize) -> Result<LatticeResult> {
    let det = lattice_determinant(omega, t, n)?;
    let eps = t / n as f64;
    let diag = 2.0 - eps * eps * omega * omega;
    let path = lattice_classical_path(diag, x_i, x_f, n);
    let s_cl = lattice_action(mass, omega, eps, &path);
    let fluctuation = (mass / C::new(0.0, 2.0 * PI * det)).sqrt();
    let value = fluctuation * (C::i() * s_cl).exp();
    Ok(LatticeResult {
        amplitude: AmplitudeResult::new(value, Method::FeynmanLattice, 0.0)?
            .with_meta("slices", n as f64)
            .with_meta("eps_det_k", det),
        fluctuation,
        classical_action: s_cl,
    })
}

/// Lattice amplitude of the model with an `N/2` comparison as error estimate.
pub fn feynman_lattice(
    params: &ModelParams,
    x_f: f64,
    x_i: f64,
    t: f64,
    n: usize,
) -> Result<LatticeResult> {
    params.check_caustic(t)?;
    let wt = params.omega() * t;
    if !(wt > 0.0 && wt < PI) {
        return Err(Error::BranchWindow(wt));
    }
    let mass = params.mass();
    let mut res = lattice_propagator(mass, params.omega(), x_f, x_i, t, n)?;
    if n >= 4 {
        let half = lattice_propagator(mass, params.omega(), x_f, x_i, t, n / 2)?;
        // second-order convergence: the N/2 gap overestimates the error by 3
        res.amplitude.err_estimate = (res.amplitude.value - half.amplitude.value).norm() / 3.0;
    }
    Ok(res)
}
