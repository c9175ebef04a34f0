//! Position-space eigenfunctions of `H` and `H†`.
//!
//! ```text
//! φ_n(x) = N_φ / √(2ⁿ n!) H_n(e^{iθ} x) exp(-e^{2iθ} x² / 2)
//! Ψ_n(x) = N_Ψ / √(2ⁿ n!) H_n(e^{-iθ} x) exp(-e^{-2iθ} x² / 2)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::QuadratureRule1D;

type C = Complex64;

pub const MAX_HERMITE_DEGREE: usize = 200;
pub const MAX_NORM_LEVEL: usize = 60;
pub const STENCIL_STEP: f64 = 1e-3;

/// Right eigenvectors (of `H`) or left eigenvectors (of `H†`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Phi,
    Psi,
}

impl Family {
    pub fn dual(self) -> Self {
        match self {
            Family::Phi => Family::Psi,
            Family::Psi => Family::Phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenstateSpec {
    pub n: usize,
    pub family: Family,
    pub params: ModelParams,
}

impl EigenstateSpec {
    pub fn new(n: usize, family: Family, params: ModelParams) -> Self {
        Self { n, family, params }
    }

    pub fn phi(n: usize, params: ModelParams) -> Self {
        Self::new(n, Family::Phi, params)
    }

    pub fn psi(n: usize, params: ModelParams) -> Self {
        Self::new(n, Family::Psi, params)
    }

    /// `e^{iθ}` for φ, `e^{-iθ}` for Ψ.
    pub fn rotation(&self) -> C {
        rotation(self.family, &self.params)
    }

    pub fn normalization(&self) -> C {
        normalization(self.family, &self.params)
    }
}

pub(crate) fn rotation(family: Family, params: &ModelParams) -> C {
    match family {
        Family::Phi => params.rotation(),
        Family::Psi => params.rotation().conj(),
    }
}

pub(crate) fn normalization(family: Family, params: &ModelParams) -> C {
    match family {
        Family::Phi => params.n_phi(),
        Family::Psi => params.n_psi(),
    }
}

/// Physicists' Hermite polynomial `H_n(u)` by the three-term recurrence.
pub fn hermite(n: usize, u: C) -> Result<C> {
    if n > MAX_HERMITE_DEGREE {
        return Err(Error::Validation(format!(
            "Hermite degree {n} exceeds {MAX_HERMITE_DEGREE}"
        )));
    }
    let mut prev = C::new(0.0, 0.0);
    let mut cur = C::new(1.0, 0.0);
    for k in 0..n {
        let next = u * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(Error::Overflow { n });
    }
    Ok(cur)
}

/// `H_k(u)/√(2^k k!)` for `k = 0..=n`, free of overflow for moderate `|u|`.
pub fn normalized_hermite_ladder(n: usize, u: C) -> Vec<C> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(C::new(1.0, 0.0));
    if n == 0 {
        return out;
    }
    out.push(u * std::f64::consts::SQRT_2);
    for k in 1..n {
        let kf = k as f64;
        let next = u * out[k] * (2.0 / (kf + 1.0)).sqrt() - out[k - 1] * (kf / (kf + 1.0)).sqrt();
        out.push(next);
    }
    out
}

/// Values of levels `0..=n_max` of one family at `x`.
pub fn eigenstate_ladder(family: Family, params: &ModelParams, n_max: usize, x: f64) -> Vec<C> {
    let u = rotation(family, params) * x;
    let envelope = normalization(family, params) * (-u * u * 0.5).exp();
    normalized_hermite_ladder(n_max, u)
        .into_iter()
        .map(|h| h * envelope)
        .collect()
}

pub fn eigenstate_eval(spec: &EigenstateSpec, x: f64) -> C {
    eigenstate_ladder(spec.family, &spec.params, spec.n, x)[spec.n]
}

/// `∫ conj(f(x)) g(x) dx`, checked against the refined rule.
pub fn inner_product<F, G>(f: F, g: G, quad: &QuadratureRule1D) -> Result<C>
where
    F: Fn(f64) -> C,
    G: Fn(f64) -> C,
{
    quad.integrate_checked(|x| f(x).conj() * g(x))
}

/// `⟨a|b⟩` for two eigenstates.
pub fn eigenstate_overlap(
    a: &EigenstateSpec,
    b: &EigenstateSpec,
    quad: &QuadratureRule1D,
) -> Result<C> {
    inner_product(|x| eigenstate_eval(a, x), |x| eigenstate_eval(b, x), quad)
}

/// Legendre polynomial `P_n(x)` by Bonnet's recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `‖φ_n‖² = |N|² √(π / cos 2θ) P_n(1 / cos 2θ)`.
///
/// Also valid for the Ψ family with `N_Ψ` in place of `N_φ`.
pub fn eigenstate_norm_sq(spec: &EigenstateSpec) -> Result<f64> {
    if spec.n > MAX_NORM_LEVEL {
        return Err(Error::Validation(format!(
            "norm formula is evaluated only for n <= {MAX_NORM_LEVEL}, got {}",
            spec.n
        )));
    }
    let w = spec.params.omega();
    let n2 = spec.normalization().norm_sqr();
    Ok(n2 * (std::f64::consts::PI * w).sqrt() * legendre(spec.n, w))
}

/// Five-point central difference.
pub fn derivative5<F: Fn(f64) -> C>(f: F, x: f64, h: f64) -> C {
    (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h)
}

/// Largest `|L f_n - √n f_{n-1}|` over `grid`, where `L` is the lowering
/// operator of the family: `A = (e^{iθ}x + e^{-iθ}d/dx)/√2` for φ and
/// `B† = (e^{-iθ}x + e^{iθ}d/dx)/√2` for Ψ, with the derivative taken by
/// the five-point stencil.
pub fn lowering_residual(spec: &EigenstateSpec, grid: &[f64]) -> f64 {
    let r = spec.rotation();
    let f = |x: f64| eigenstate_eval(spec, x);
    let lower = EigenstateSpec { n: spec.n.saturating_sub(1), ..*spec };
    let sqrt_n = (spec.n as f64).sqrt();
    grid.iter()
        .map(|&x| {
            let applied = (r * x * f(x) + r.conj() * derivative5(f, x, STENCIL_STEP))
                * std::f64::consts::FRAC_1_SQRT_2;
            let target = if spec.n == 0 {
                C::new(0.0, 0.0)
            } else {
                eigenstate_eval(&lower, x) * sqrt_n
            };
            (applied - target).norm()
        })
        .fold(0.0, f64::max)
}

/// Value of the Fock-space vector `Σ_k c_k |k⟩` at `x`, using the hermitian
/// oscillator eigenfunctions.
pub fn fock_state_eval(coeffs: &[C], x: f64) -> C {
    if coeffs.is_empty() {
        return C::new(0.0, 0.0);
    }
    let p0 = ModelParams::new(0.0).expect("zero angle is valid");
    eigenstate_ladder(Family::Phi, &p0, coeffs.len() - 1, x)
        .iter()
        .zip(coeffs)
        .map(|(phi, c)| phi * c)
        .sum()
}

/// `prefactor · P(x) · exp(linear x - quadratic x²)` with `P` given by
/// ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticGaussian {
    pub prefactor: C,
    pub poly: Vec<C>,
    pub linear: C,
    pub quadratic: C,
}

impl AnalyticGaussian {
    pub fn new(prefactor: C, poly: Vec<C>, linear: C, quadratic: C) -> Result<Self> {
        if quadratic.re <= 0.0 {
            return Err(Error::Decay(quadratic.re));
        }
        Ok(Self {
            prefactor,
            poly,
            linear,
            quadratic,
        })
    }

    /// The eigenfunction `spec` written in closed form.
    pub fn eigenstate(spec: &EigenstateSpec) -> Result<Self> {
        if spec.n > 40 {
            return Err(Error::Validation(
                "monomial expansion is limited to n <= 40".into(),
            ));
        }
        let r = spec.rotation();
        let mut scale = 1.0;
        for k in 1..=spec.n {
            scale *= 2.0 * k as f64;
        }
        let poly = hermite_coefficients(spec.n)
            .into_iter()
            .enumerate()
            .map(|(k, c)| r.powu(k as u32) * c)
            .collect();
        Self::new(
            spec.normalization() / scale.sqrt(),
            poly,
            C::new(0.0, 0.0),
            r * r * 0.5,
        )
    }

    pub fn eval(&self, x: f64) -> C {
        let p = self
            .poly
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, c| acc * x + c);
        self.prefactor * p * (self.linear * x - self.quadratic * x * x).exp()
    }
}

/// Monomial coefficients of `H_n`, ascending.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    cur[0] = 1.0;
    for k in 0..n {
        let mut next = vec![0.0; n + 1];
        for j in 0..n {
            next[j + 1] += 2.0 * cur[j];
        }
        for j in 0..=n {
            next[j] -= 2.0 * k as f64 * prev[j];
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `(T f)(x) = e^{iθ/2} f(e^{iθ} x)` on the closed Gaussian family.
pub fn squeeze_apply_analytic(params: &ModelParams, f: &AnalyticGaussian) -> Result<AnalyticGaussian> {
    let r = params.rotation();
    let quadratic = f.quadratic * r * r;
    if quadratic.re <= 0.0 {
        return Err(Error::Decay(quadratic.re));
    }
    Ok(AnalyticGaussian {
        prefactor: f.prefactor * C::from_polar(1.0, 0.5 * params.theta()),
        poly: f
            .poly
            .iter()
            .enumerate()
            .map(|(k, c)| c * r.powu(k as u32))
            .collect(),
        linear: f.linear * r,
        quadratic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(theta: f64) -> ModelParams {
        ModelParams::new(theta).unwrap()
    }

    // explicit sum H_n(u) = n! Σ_m (-1)^m (2u)^{n-2m} / (m! (n-2m)!)
    fn hermite_explicit(n: usize, u: C) -> C {
        let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                (u * 2.0).powu((n - 2 * m) as u32) * (sign * fact(n) / (fact(m) * fact(n - 2 * m)))
            })
            .sum()
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, C::new(3.0, -7.0)).unwrap(), C::new(1.0, 0.0));
        assert_eq!(hermite(1, C::new(2.0, 1.0)).unwrap(), C::new(4.0, 2.0));
        // H_5(u) = 32u⁵ - 160u³ + 120u
        let u: f64 = 0.7;
        let want = 32.0 * u.powi(5) - 160.0 * u.powi(3) + 120.0 * u;
        assert!((hermite(5, C::from(u)).unwrap() - C::from(want)).norm() < 1e-12);
        assert!(hermite(201, C::from(0.1)).is_err());
        assert_eq!(hermite(200, C::from(1e6)), Err(Error::Overflow { n: 200 }));
    }

    #[test]
    fn hermite_matches_explicit_sum() {
        for n in 0..18 {
            for u in [C::new(0.3, 0.2), C::new(-1.4, 0.8), C::new(2.0, 0.0)] {
                let a = hermite(n, u).unwrap();
                let b = hermite_explicit(n, u);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "n={n} u={u}");
            }
        }
        let c = hermite_coefficients(4);
        assert_eq!(c, vec![12.0, 0.0, -48.0, 0.0, 16.0]);
    }

    #[test]
    fn vacuum_and_hermitian_limit() {
        let p = params(0.3);
        for x in [-1.5, 0.0, 0.4, 2.2] {
            let got = eigenstate_eval(&EigenstateSpec::phi(0, p), x);
            let want = p.n_phi() * (-C::from_polar(1.0, 0.6) * x * x * 0.5).exp();
            assert!((got - want).norm() < 1e-15);
        }
        let p0 = params(0.0);
        for n in 0..6 {
            for x in [-2.0, 0.3, 1.7] {
                let v = eigenstate_eval(&EigenstateSpec::phi(n, p0), x);
                assert_eq!(v.im, 0.0);
                let fact: f64 = (1..=n).map(|j| j as f64).product();
                let want = PI.powf(-0.25) / (2f64.powi(n as i32) * fact).sqrt()
                    * hermite_explicit(n, C::from(x)).re
                    * (-x * x / 2.0).exp();
                assert!((v.re - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lowering_operators_act_as_ladders() {
        let grid: Vec<f64> = (0..=80).map(|k| -4.0 + 0.1 * k as f64).collect();
        for theta in [0.0, 0.3, -0.5] {
            let p = params(theta);
            for n in 0..6 {
                for spec in [EigenstateSpec::phi(n, p), EigenstateSpec::psi(n, p)] {
                    let r = lowering_residual(&spec, &grid);
                    assert!(r < 1e-6, "theta {theta} n {n} {:?}: {r}", spec.family);
                }
            }
        }
    }

    #[test]
    fn biorthonormality_examples() {
        let p = params(0.3);
        let quad = QuadratureRule1D::standard();
        let v = eigenstate_overlap(&EigenstateSpec::phi(0, p), &EigenstateSpec::psi(0, p), &quad).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
        let v = eigenstate_overlap(&EigenstateSpec::phi(2, p), &EigenstateSpec::psi(5, p), &quad).unwrap();
        assert!(v.norm() < 1e-8);
        let p0 = params(0.0);
        let v = eigenstate_overlap(&EigenstateSpec::phi(0, p0), &EigenstateSpec::phi(0, p0), &quad).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert_eq!(legendre(1, 0.3), 0.3);
        assert!((legendre(2, 0.3) - (1.5 * 0.09 - 0.5)).abs() < 1e-15);
        for n in 0..20 {
            assert!((legendre(n, 1.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn norm_formula_examples() {
        let p0 = params(0.0);
        for n in [0, 3, 9] {
            let v = eigenstate_norm_sq(&EigenstateSpec::phi(n, p0)).unwrap();
            assert!((v - 1.0).abs() < 1e-14);
        }
        let p = params(0.3);
        let quad = QuadratureRule1D::standard();
        let mut prev = 0.0;
        for n in 0..=10 {
            let spec = EigenstateSpec::phi(n, p);
            let formula = eigenstate_norm_sq(&spec).unwrap();
            let numeric = eigenstate_overlap(&spec, &spec, &quad).unwrap();
            assert!((numeric.re / formula - 1.0).abs() < 1e-6, "n={n}");
            assert!(numeric.im.abs() < 1e-10);
            assert!(formula > prev);
            prev = formula;
        }
        let norm = |n| eigenstate_norm_sq(&EigenstateSpec::phi(n, p)).unwrap();
        assert!(norm(20) > norm(10) && norm(10) > norm(5));
        assert!(eigenstate_norm_sq(&EigenstateSpec::phi(61, p)).is_err());
    }

    #[test]
    fn squeeze_maps_ground_state_into_the_right_family() {
        let p0 = params(0.0);
        let alpha = C::from_polar(2.0, PI / 5.0);
        let p = params(0.3).with_alpha(alpha).unwrap();
        let ground = AnalyticGaussian::eigenstate(&EigenstateSpec::phi(0, p0)).unwrap();
        assert_eq!(squeeze_apply_analytic(&p0, &ground).unwrap(), ground);
        let squeezed = squeeze_apply_analytic(&p, &ground).unwrap();
        for x in [-3.0, -0.5, 0.0, 1.1, 2.6] {
            let want = eigenstate_eval(&EigenstateSpec::phi(0, p), x) / alpha;
            assert!((squeezed.eval(x) - want).norm() < 1e-10);
        }
    }

    #[test]
    fn squeeze_outside_the_decay_wedge_is_rejected() {
        let f = AnalyticGaussian::new(C::from(1.0), vec![C::from(1.0)], C::from(0.0), C::from_polar(1.0, 1.2)).unwrap();
        assert!(matches!(
            squeeze_apply_analytic(&params(0.3), &f),
            Err(Error::Decay(_))
        ));
        assert!(AnalyticGaussian::new(C::from(1.0), vec![], C::from(0.0), C::from(-1.0)).is_err());
    }

    #[test]
    fn closed_form_eigenstates_match_the_recurrence() {
        let p = params(-0.4);
        for n in [0, 1, 4, 9] {
            for spec in [EigenstateSpec::phi(n, p), EigenstateSpec::psi(n, p)] {
                let g = AnalyticGaussian::eigenstate(&spec).unwrap();
                for x in [-2.5, 0.2, 1.9] {
                    let a = g.eval(x);
                    let b = eigenstate_eval(&spec, x);
                    assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn fock_vector_evaluation() {
        let c = [C::new(0.5, 0.0), C::new(0.0, -1.0), C::new(2.0, 1.0)];
        let p0 = params(0.0);
        for x in [-1.0, 0.7] {
            let want: C = (0..3)
                .map(|k| eigenstate_eval(&EigenstateSpec::phi(k, p0), x) * c[k])
                .sum();
            assert!((fock_state_eval(&c, x) - want).norm() < 1e-15);
        }
        assert_eq!(fock_state_eval(&[], 0.3), C::new(0.0, 0.0));
    }
}
