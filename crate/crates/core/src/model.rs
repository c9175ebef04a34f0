//! Model parameters and the scalar closed forms of the quasi-hermitian
//! oscillator
//!
//! ```text
//! H = [ (e^{-iθ} p)^2 + (e^{iθ} x)^2 ] / (2 cos 2θ),     |θ| < π/4
//! ```
//!
//! with frequency `ω = 1 / cos 2θ`, spectrum `ω (n + 1/2)`, classical
//! trajectories and classical actions.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_TOL_ANALYTIC: f64 = 1e-10;
pub const DEFAULT_TOL_QUADRATURE: f64 = 1e-6;

/// `ω = 1/cos(2θ)`.
pub fn omega_theta(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta.abs() >= FRAC_PI_4 {
        return Err(Error::Range(theta));
    }
    Ok(1.0 / (2.0 * theta).cos())
}

/// Parameters of the model. The frequency is always derived from `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    theta: f64,
    alpha: Complex64,
    tol_analytic: f64,
    tol_quadrature: f64,
}

impl ModelParams {
    pub fn new(theta: f64) -> Result<Self> {
        omega_theta(theta)?;
        Ok(Self {
            theta,
            alpha: Complex64::new(1.0, 0.0),
            tol_analytic: DEFAULT_TOL_ANALYTIC,
            tol_quadrature: DEFAULT_TOL_QUADRATURE,
        })
    }

    /// Sets the free normalization constant of the right eigenfamily.
    /// The left family picks up `1/conj(alpha)` so that biorthonormality holds.
    pub fn with_alpha(mut self, alpha: Complex64) -> Result<Self> {
        if !(alpha.norm() > 0.0) || !alpha.is_finite() {
            return Err(Error::Validation(format!(
                "normalization constant must be finite and non-zero, got {alpha}"
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_tolerances(mut self, tol_analytic: f64, tol_quadrature: f64) -> Result<Self> {
        if !(tol_analytic > 0.0 && tol_quadrature > 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        self.tol_analytic = tol_analytic;
        self.tol_quadrature = tol_quadrature;
        Ok(self)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn omega(&self) -> f64 {
        1.0 / (2.0 * self.theta).cos()
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn tol_analytic(&self) -> f64 {
        self.tol_analytic
    }

    pub fn tol_quadrature(&self) -> f64 {
        self.tol_quadrature
    }

    /// Same model with `θ → -θ` (the adjoint hamiltonian). `alpha` is kept.
    pub fn negated(&self) -> Self {
        Self {
            theta: -self.theta,
            ..*self
        }
    }

    /// `e^{iθ}`
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// Prefactor of the right vacuum `N_φ exp(-e^{2iθ} x²/2)`:
    /// `N_φ = α e^{iθ/2} π^{-1/4}`.
    pub fn n_phi(&self) -> Complex64 {
        self.alpha * Complex64::from_polar(PI.powf(-0.25), 0.5 * self.theta)
    }

    /// Prefactor of the left vacuum: `N_Ψ = e^{-iθ/2} π^{-1/4} / conj(α)`.
    pub fn n_psi(&self) -> Complex64 {
        Complex64::from_polar(PI.powf(-0.25), -0.5 * self.theta) / self.alpha.conj()
    }

    /// Mass of the lagrangian `L = m ẋ²/2 - m ω² x²/2`, `m = e^{2iθ}/ω`.
    pub fn mass(&self) -> Complex64 {
        Complex64::from_polar(1.0 / self.omega(), 2.0 * self.theta)
    }

    pub(crate) fn check_caustic(&self, t: f64) -> Result<f64> {
        let s = (self.omega() * t).sin();
        if s.abs() < self.tol_analytic {
            return Err(Error::Caustic(s.abs()));
        }
        Ok(s)
    }
}

/// `E_n = ω (n + 1/2)`.
pub fn energy_level(params: &ModelParams, n: usize) -> f64 {
    params.omega() * (n as f64 + 0.5)
}

/// Lagrangian `e^{2iθ}/(2ω) ẋ² - (ω/2) e^{2iθ} x²`.
pub fn lagrangian(params: &ModelParams, x: f64, xdot: f64) -> Complex64 {
    let w = params.omega();
    let phase = Complex64::from_polar(1.0, 2.0 * params.theta());
    phase * (0.5 * xdot * xdot / w - 0.5 * w * x * x)
}

/// Boundary data of a classical trajectory `x(0) = x_i`, `x(t) = x_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPath {
    pub x_i: f64,
    pub x_f: f64,
    pub t_total: f64,
    pub params: ModelParams,
}

impl ClassicalPath {
    pub fn new(x_i: f64, x_f: f64, t_total: f64, params: ModelParams) -> Result<Self> {
        if !(t_total > 0.0) || !t_total.is_finite() {
            return Err(Error::Validation(format!(
                "total time must be positive, got {t_total}"
            )));
        }
        Ok(Self {
            x_i,
            x_f,
            t_total,
            params,
        })
    }
}

/// `x_cl(τ) = x_i sin(ω(t-τ))/sin(ωt) + x_f sin(ωτ)/sin(ωt)`.
pub fn classical_x(path: &ClassicalPath, tau: f64) -> Result<f64> {
    let t = path.t_total;
    if !(0.0..=t).contains(&tau) {
        return Err(Error::Validation(format!("tau = {tau} outside [0, {t}]")));
    }
    let s = path.params.check_caustic(t)?;
    // exact at the endpoints rather than relying on sin(0) rounding
    if tau == 0.0 {
        return Ok(path.x_i);
    }
    if tau == t {
        return Ok(path.x_f);
    }
    let w = path.params.omega();
    Ok(path.x_i * (w * (t - tau)).sin() / s + path.x_f * (w * tau).sin() / s)
}

/// `S[x_cl] = e^{2iθ} / (2 sin ωt) [ (x_i² + x_f²) cos ωt - 2 x_i x_f ]`.
pub fn classical_action(path: &ClassicalPath) -> Result<Complex64> {
    let s = path.params.check_caustic(path.t_total)?;
    let c = (path.params.omega() * path.t_total).cos();
    let (xi, xf) = (path.x_i, path.x_f);
    let bracket = (xi * xi + xf * xf) * c - 2.0 * xi * xf;
    Ok(Complex64::from_polar(1.0, 2.0 * path.params.theta()) * (bracket / (2.0 * s)))
}

/// Classical bicoherent-label trajectory `z(t) = z_i e^{-iωt}`.
pub fn classical_z(z_i: Complex64, params: &ModelParams, t: f64) -> Complex64 {
    z_i * Complex64::from_polar(1.0, -params.omega() * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_theta(0.0).unwrap(), 1.0);
        assert!(close(omega_theta(PI / 6.0).unwrap(), 2.0, 1e-14));
        assert_eq!(omega_theta(FRAC_PI_4), Err(Error::Range(FRAC_PI_4)));
        assert!(omega_theta(-FRAC_PI_4).is_err());
        assert!(ModelParams::new(0.8).is_err());
    }

    #[test]
    fn energy_examples() {
        let p0 = ModelParams::new(0.0).unwrap();
        assert_eq!(energy_level(&p0, 0), 0.5);
        let p = ModelParams::new(PI / 6.0).unwrap();
        assert!(close(energy_level(&p, 1), 3.0, 1e-13));
        let (a, b) = (ModelParams::new(0.3).unwrap(), ModelParams::new(-0.3).unwrap());
        for n in 0..10 {
            assert_eq!(energy_level(&a, n), energy_level(&b, n));
        }
    }

    #[test]
    fn normalization_constraint_holds_for_any_alpha() {
        for alpha in [Complex64::new(1.0, 0.0), Complex64::from_polar(2.0, PI / 5.0)] {
            let p = ModelParams::new(0.37).unwrap().with_alpha(alpha).unwrap();
            let lhs = p.n_phi().conj() * p.n_psi();
            let rhs = Complex64::from_polar(1.0 / PI.sqrt(), -0.37);
            assert!((lhs - rhs).norm() < 1e-15);
        }
        assert!(ModelParams::new(0.1)
            .unwrap()
            .with_alpha(Complex64::new(0.0, 0.0))
            .is_err());
    }

    #[test]
    fn classical_x_boundary_conditions_are_exact() {
        let p = ModelParams::new(0.3).unwrap();
        let path = ClassicalPath::new(0.5, -1.0, 0.7, p).unwrap();
        assert_eq!(classical_x(&path, 0.0).unwrap(), 0.5);
        assert_eq!(classical_x(&path, 0.7).unwrap(), -1.0);
        assert!(classical_x(&path, 0.8).is_err());
    }

    #[test]
    fn classical_x_solves_equation_of_motion() {
        let p = ModelParams::new(0.3).unwrap();
        let w = p.omega();
        let path = ClassicalPath::new(0.5, -1.0, 0.7, p).unwrap();
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        let mut tau = 0.01;
        while tau < 0.69 {
            let xm = classical_x(&path, tau - h).unwrap();
            let x0 = classical_x(&path, tau).unwrap();
            let xp = classical_x(&path, tau + h).unwrap();
            let residual = (xp - 2.0 * x0 + xm) / (h * h) + w * w * x0;
            worst = worst.max(residual.abs());
            tau += 0.01;
        }
        // O(h²) truncation of the second difference
        assert!(worst < 1e-5, "residual {worst}");
    }

    #[test]
    fn caustic_is_rejected() {
        let p = ModelParams::new(0.2).unwrap();
        let t = PI / p.omega();
        let path = ClassicalPath::new(0.1, 0.2, t, p).unwrap();
        assert!(matches!(classical_action(&path), Err(Error::Caustic(_))));
        assert!(matches!(classical_x(&path, 0.1), Err(Error::Caustic(_))));
        assert!(ClassicalPath::new(0.0, 0.0, 0.0, p).is_err());
    }

    #[test]
    fn action_examples() {
        let p = ModelParams::new(0.3).unwrap();
        let zero = ClassicalPath::new(0.0, 0.0, 0.9, p).unwrap();
        assert_eq!(classical_action(&zero).unwrap(), Complex64::new(0.0, 0.0));

        // free-particle limit
        let (xi, xf) = (0.4, -0.8);
        let mut last = f64::INFINITY;
        for t in [1e-1, 1e-2, 1e-3] {
            let s = classical_action(&ClassicalPath::new(xi, xf, t, p).unwrap()).unwrap();
            let free = p.mass() * ((xf - xi) * (xf - xi) / (2.0 * t));
            let dev = (s / free - 1.0).norm();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn action_matches_simpson_integral_of_lagrangian() {
        let p = ModelParams::new(0.3).unwrap();
        let (xi, xf, t) = (0.5, -1.0, 0.7);
        let path = ClassicalPath::new(xi, xf, t, p).unwrap();
        let w = p.omega();
        let s = (w * t).sin();
        // velocity from the closed form, independent of classical_x
        let vel = |tau: f64| w * (-xi * (w * (t - tau)).cos() + xf * (w * tau).cos()) / s;
        let n = 2000;
        let h = t / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let tau = k as f64 * h;
            let weight = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += lagrangian(&p, classical_x(&path, tau).unwrap(), vel(tau)) * weight;
        }
        let simpson = acc * (h / 3.0);
        let closed = classical_action(&path).unwrap();
        assert!((simpson - closed).norm() < 1e-10, "{simpson} vs {closed}");
    }

    #[test]
    fn action_is_symmetric_and_theta_enters_as_a_phase() {
        let p = ModelParams::new(-0.41).unwrap();
        let a = ClassicalPath::new(0.3, 1.1, 0.8, p).unwrap();
        let b = ClassicalPath::new(1.1, 0.3, 0.8, p).unwrap();
        assert_eq!(classical_action(&a).unwrap(), classical_action(&b).unwrap());

        // same frequency at θ = 0: rescale time so ω t matches
        let p0 = ModelParams::new(0.0).unwrap();
        let c = ClassicalPath::new(0.3, 1.1, 0.8 * p.omega(), p0).unwrap();
        let ratio = classical_action(&a).unwrap() / classical_action(&c).unwrap();
        assert!((ratio - Complex64::from_polar(1.0, -0.82)).norm() < 1e-12);
    }

    #[test]
    fn classical_z_examples() {
        let p = ModelParams::new(0.25).unwrap();
        let zi = Complex64::new(0.6, -0.3);
        assert_eq!(classical_z(zi, &p, 0.0), zi);
        let h = 1e-4;
        for t in [0.2, 1.3, 4.0] {
            assert!((classical_z(zi, &p, t).norm() - zi.norm()).abs() < 1e-15);
            let dz = (classical_z(zi, &p, t + h) - classical_z(zi, &p, t - h)) / (2.0 * h);
            let residual = Complex64::i() * dz - classical_z(zi, &p, t) * p.omega();
            assert!(residual.norm() < 1e-7);
        }
    }
}
