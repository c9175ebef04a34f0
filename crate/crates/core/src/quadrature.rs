//! Real-line and complex-plane quadrature.
//!
//! Gauss–Hermite nodes are found by Newton iteration on the normalized
//! Hermite functions, which stays finite for orders up to several hundred.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

pub const DEFAULT_GH_ORDER: usize = 200;
pub const MAX_GH_ORDER: usize = 700;

/// Gauss–Hermite rule for the weight `e^{-x²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // weights * exp(nodes²), used for integrands that carry their own decay
    scaled: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_GH_ORDER {
            return Err(Error::Validation(format!(
                "Gauss-Hermite order must lie in 1..={MAX_GH_ORDER}, got {order}"
            )));
        }
        let n = order;
        let nf = n as f64;
        let pim4 = PI.powf(-0.25);
        // Golub–Welsch: eigenvalues of the Jacobi matrix seed the Newton polish
        let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        let mut weights = vec![0.0; n];
        for (z, w) in nodes.iter_mut().zip(weights.iter_mut()) {
            let mut pp = 0.0;
            for _ in 0..8 {
                // p1 ends as ψ_n(z) e^{z²/2}, p2 as ψ_{n-1}(z) e^{z²/2}
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = *z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                *z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if !pp.is_finite() || pp == 0.0 {
                return Err(Error::NonConverged {
                    delta: f64::NAN,
                    tol: 1e-15,
                });
            }
            *w = 2.0 / (pp * pp);
        }
        // enforce exact symmetry
        for i in 0..n / 2 {
            let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[n - 1 - i]);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let scaled = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| (w.ln() + x * x).exp())
            .collect();
        Ok(Self {
            nodes,
            weights,
            scaled,
        })
    }

    /// Shared rule of the given order, built once per process.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("cache poisoned").get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .expect("cache poisoned")
            .insert(order, rule.clone());
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ e^{-x²} f(x) dx`
    pub fn integrate_weighted<F: Fn(f64) -> C>(&self, f: F) -> C {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }

    /// `∫ f(x) dx` for an `f` that decays at least like a Gaussian.
    pub fn integrate<F: Fn(f64) -> C>(&self, f: F) -> C {
        self.nodes
            .iter()
            .zip(&self.scaled)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussHermite,
    TruncatedComposite,
}

/// One-dimensional rule over the real line.
///
/// `TruncatedComposite` is the trapezoid rule with `order` intervals on
/// `[-halfwidth, halfwidth]`; for analytic integrands with Gaussian decay it
/// converges geometrically.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    kind: QuadratureKind,
    order: usize,
    halfwidth: f64,
    tol: f64,
    gh: Option<Arc<GaussHermite>>,
}

impl QuadratureRule1D {
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        let gh = GaussHermite::cached(order)?;
        Ok(Self {
            kind: QuadratureKind::GaussHermite,
            order,
            halfwidth: f64::INFINITY,
            tol: crate::model::DEFAULT_TOL_QUADRATURE,
            gh: Some(gh),
        })
    }

    pub fn composite(order: usize, halfwidth: f64) -> Result<Self> {
        if order < 2 || !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return Err(Error::Validation(format!(
                "composite rule needs order >= 2 and finite positive halfwidth, got {order}, {halfwidth}"
            )));
        }
        Ok(Self {
            kind: QuadratureKind::TruncatedComposite,
            order,
            halfwidth,
            tol: crate::model::DEFAULT_TOL_QUADRATURE,
            gh: None,
        })
    }

    /// The default rule: 200-point Gauss–Hermite.
    pub fn standard() -> Self {
        Self::gauss_hermite(DEFAULT_GH_ORDER).expect("default order is valid")
    }

    /// Composite halfwidth `max(8, 4 + sqrt(2 n_max))` for states up to `n_max`.
    pub fn composite_for_level(n_max: usize, order: usize) -> Result<Self> {
        let l = (4.0 + (2.0 * n_max as f64).sqrt()).max(8.0);
        Self::composite(order, l)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The same rule at twice the order.
    pub fn refined(&self) -> Result<Self> {
        let next = match self.kind {
            QuadratureKind::GaussHermite => Self::gauss_hermite(2 * self.order)?,
            QuadratureKind::TruncatedComposite => Self::composite(2 * self.order, self.halfwidth)?,
        };
        Ok(next.with_tol(self.tol))
    }

    /// `∫ f(x) dx`
    pub fn integrate<F: Fn(f64) -> C>(&self, f: F) -> C {
        match &self.gh {
            Some(gh) => gh.integrate(f),
            None => {
                let h = 2.0 * self.halfwidth / self.order as f64;
                let mut acc = (f(-self.halfwidth) + f(self.halfwidth)) * 0.5;
                for k in 1..self.order {
                    acc += f(-self.halfwidth + k as f64 * h);
                }
                acc * h
            }
        }
    }

    /// Integrates and compares with the refined rule.
    ///
    /// Returns the refined value; fails when the two differ by more than `tol`.
    pub fn integrate_checked<F: Fn(f64) -> C>(&self, f: F) -> Result<C> {
        let coarse = self.integrate(&f);
        let fine = match self.kind {
            QuadratureKind::GaussHermite if 2 * self.order > MAX_GH_ORDER => {
                // cannot double further; fall back to a dense composite rule
                Self::composite(8 * self.order, 40.0)?.integrate(&f)
            }
            _ => self.refined()?.integrate(&f),
        };
        let delta = (fine - coarse).norm();
        if !(delta <= self.tol) {
            return Err(Error::NonConverged {
                delta,
                tol: self.tol,
            });
        }
        Ok(fine)
    }
}

/// Tensor Gauss–Hermite rule for `∫ d²z/π e^{-|z|²} F(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule2D {
    gh: Arc<GaussHermite>,
    tol: f64,
}

impl QuadratureRule2D {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Self {
            gh: GaussHermite::cached(order)?,
            tol: crate::model::DEFAULT_TOL_QUADRATURE,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn order(&self) -> usize {
        self.gh.order()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Nodes `z_{jk} = x_j + i x_k` with weights `w_j w_k / π`, row-major in `j`.
    pub fn points(&self) -> Vec<(C, f64)> {
        let n = self.gh.order();
        let mut out = Vec::with_capacity(n * n);
        for (&x, &wx) in self.gh.nodes().iter().zip(self.gh.weights()) {
            for (&y, &wy) in self.gh.nodes().iter().zip(self.gh.weights()) {
                out.push((C::new(x, y), wx * wy / PI));
            }
        }
        out
    }

    /// `∫ d²z/π e^{-|z|²} F(z)`; the Gaussian is carried by the weights.
    pub fn integrate<F: Fn(C) -> C>(&self, f: F) -> C {
        let mut sum = C::new(0.0, 0.0);
        let mut comp = C::new(0.0, 0.0);
        for (z, w) in self.points() {
            // Kahan summation keeps large cancelling contributions honest
            let y = f(z) * w - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    /// Integrates at this order and at twice the order.
    pub fn integrate_checked<F: Fn(C) -> C>(&self, f: F) -> Result<C> {
        let coarse = self.integrate(&f);
        let fine = Self::new((2 * self.order()).min(MAX_GH_ORDER))?.integrate(&f);
        let delta = (fine - coarse).norm();
        if !(delta <= self.tol) {
            return Err(Error::NonConverged {
                delta,
                tol: self.tol,
            });
        }
        Ok(fine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_half(k: usize) -> f64 {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let mut g = PI.sqrt();
        for j in 0..k {
            g *= j as f64 + 0.5;
        }
        g
    }

    #[test]
    fn gauss_hermite_is_exact_on_polynomials() {
        for order in [1, 2, 5, 20, 40] {
            let gh = GaussHermite::new(order).unwrap();
            for deg in 0..2 * order {
                let got = gh.integrate_weighted(|x| C::from(x.powi(deg as i32))).re;
                let want = if deg % 2 == 1 { 0.0 } else { gamma_half(deg / 2) };
                let scale = gamma_half(deg / 2 + 1).max(1.0);
                assert!(
                    (got - want).abs() <= 1e-12 * scale,
                    "order {order} degree {deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        for order in [7, 200, 700] {
            let gh = GaussHermite::new(order).unwrap();
            let x = gh.nodes();
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for i in 0..order {
                assert!((x[i] + x[order - 1 - i]).abs() < 1e-12 * x[i].abs().max(1.0));
            }
            let total: f64 = gh.weights().iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-12);
        }
        assert!(GaussHermite::new(0).is_err());
        assert!(GaussHermite::new(MAX_GH_ORDER + 1).is_err());
    }

    #[test]
    fn scaled_rule_handles_wide_gaussians() {
        let rule = QuadratureRule1D::standard();
        // ∫ exp(-c x²) dx = √(π/c) for complex c with Re c > 0
        for c in [C::new(1.0, 0.0), C::new(0.36, 0.93), C::new(2.5, -1.0)] {
            let got = rule.integrate(|x| (-c * x * x).exp());
            let want = (C::from(PI) / c).sqrt();
            assert!((got - want).norm() < 1e-12, "{c}: {got} vs {want}");
        }
    }

    #[test]
    fn composite_rule_is_spectrally_accurate() {
        let rule = QuadratureRule1D::composite(400, 10.0).unwrap();
        let got = rule.integrate(|x| (C::new(-0.8, 0.4) * x * x + C::new(0.0, 1.3) * x).exp());
        let c = C::new(0.8, -0.4);
        let b = C::new(0.0, 1.3);
        let want = (C::from(PI) / c).sqrt() * (b * b / (c * 4.0)).exp();
        assert!((got - want).norm() < 1e-13);
        assert_eq!(rule.refined().unwrap().order(), 800);
        assert!(QuadratureRule1D::composite(1, 1.0).is_err());
        assert_eq!(QuadratureRule1D::composite_for_level(50, 100).unwrap().halfwidth(), 14.0);
    }

    #[test]
    fn checked_integration_detects_underresolution() {
        let rule = QuadratureRule1D::gauss_hermite(4).unwrap();
        let res = rule.integrate_checked(|x| C::from((5.0 * x).cos() * (-x * x / 4.0).exp()));
        assert!(matches!(res, Err(Error::NonConverged { .. })));
        let ok = QuadratureRule1D::gauss_hermite(40)
            .unwrap()
            .integrate_checked(|x| C::from((-x * x).exp()))
            .unwrap();
        assert!((ok.re - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn complex_moments_in_the_plane() {
        let rule = QuadratureRule2D::new(12).unwrap();
        let mut fact = 1.0;
        for n in 0..12 {
            if n > 0 {
                fact *= n as f64;
            }
            for m in 0..12 {
                let got = rule.integrate(|z| z.powu(m as u32) * z.conj().powu(n as u32));
                let want = if m == n { fact } else { 0.0 };
                assert!(
                    (got - C::from(want)).norm() <= 1e-12 * fact.max(1.0),
                    "m={m} n={n}: {got}"
                );
            }
        }
    }
}
