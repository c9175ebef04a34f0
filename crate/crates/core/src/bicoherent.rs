//! Bicoherent states
//!
//! ```text
//! φ(z, x) = N_φ exp[-(|z|² + z² + e^{2iθ} x²)/2 + √2 z e^{iθ} x]
//! Ψ(z, x) = N_Ψ exp[-(|z|² + z² + e^{-2iθ} x²)/2 + √2 z e^{-iθ} x]
//! ```
//!
//! and their overlap, the θ-independent reproducing kernel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{QuadratureRule1D, QuadratureRule2D};
use crate::wavefunctions::{self, derivative5, Family, STENCIL_STEP};

type C = Complex64;

pub const SERIES_MAX_TERMS: usize = 60;
pub const SERIES_TAIL_TOL: f64 = 1e-12;
pub const MIN_REPRODUCE_ORDER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicoherentLabel {
    pub z: C,
    pub family: Family,
    pub params: ModelParams,
}

impl BicoherentLabel {
    pub fn new(z: C, family: Family, params: ModelParams) -> Self {
        Self { z, family, params }
    }

    pub fn phi(z: C, params: ModelParams) -> Self {
        Self::new(z, Family::Phi, params)
    }

    pub fn psi(z: C, params: ModelParams) -> Self {
        Self::new(z, Family::Psi, params)
    }

    /// `N(|z|) = exp(-|z|²/2)`
    pub fn norm_factor(&self) -> f64 {
        (-0.5 * self.z.norm_sqr()).exp()
    }
}

// exponent without the -|z|²/2 part
fn exponent_unnormalized(label: &BicoherentLabel, x: f64) -> C {
    let r = wavefunctions::rotation(label.family, &label.params);
    let z = label.z;
    -(z * z + r * r * x * x) * 0.5 + z * r * x * std::f64::consts::SQRT_2
}

pub fn bicoherent_eval(label: &BicoherentLabel, x: f64) -> C {
    let n = wavefunctions::normalization(label.family, &label.params);
    n * (exponent_unnormalized(label, x) - 0.5 * label.z.norm_sqr()).exp()
}

/// `φ(z, x) / N(|z|)`: the state without its label normalization.
pub fn bicoherent_eval_unnormalized(label: &BicoherentLabel, x: f64) -> C {
    let n = wavefunctions::normalization(label.family, &label.params);
    n * exponent_unnormalized(label, x).exp()
}

/// `N(|z|) Σ_{k<=k_max} z^k/√k! f_k(x)` over eigenstates of the label's family.
///
/// Fails when the first omitted coefficient `|z|^{K}/√K!` exceeds the tail
/// tolerance.
pub fn bicoherent_series(label: &BicoherentLabel, x: f64, k_max: usize) -> Result<C> {
    let r = label.z.norm();
    let mut tail = 1.0;
    for k in 1..=k_max + 1 {
        tail *= r / (k as f64).sqrt();
    }
    if tail >= SERIES_TAIL_TOL {
        return Err(Error::NonConverged {
            delta: tail,
            tol: SERIES_TAIL_TOL,
        });
    }
    let levels = wavefunctions::eigenstate_ladder(label.family, &label.params, k_max, x);
    let mut coeff = C::new(1.0, 0.0);
    let mut sum = C::new(0.0, 0.0);
    for (k, f) in levels.iter().enumerate() {
        if k > 0 {
            coeff *= label.z / (k as f64).sqrt();
        }
        sum += coeff * f;
    }
    Ok(sum * label.norm_factor())
}

/// Largest `|L f(z) - z f(z)|` over the grid, `L = A` for φ and `L = B†` for Ψ.
pub fn annihilation_check(label: &BicoherentLabel, grid: &[f64]) -> f64 {
    let r = wavefunctions::rotation(label.family, &label.params);
    let f = |x: f64| bicoherent_eval(label, x);
    grid.iter()
        .map(|&x| {
            let applied =
                (r * x * f(x) + r.conj() * derivative5(f, x, STENCIL_STEP)) * std::f64::consts::FRAC_1_SQRT_2;
            (applied - label.z * f(x)).norm()
        })
        .fold(0.0, f64::max)
}

/// `K(z1, z2) = exp[-(|z1|² + |z2|²)/2 + z1* z2]`
pub fn kernel(z1: C, z2: C) -> C {
    log_kernel(z1, z2).exp()
}

pub fn log_kernel(z1: C, z2: C) -> C {
    -0.5 * (z1.norm_sqr() + z2.norm_sqr()) + z1.conj() * z2
}

/// `⟨a|b⟩` by real-line quadrature. Labels may carry different angles; only
/// equal angles with dual families reproduce the kernel.
pub fn overlap(a: &BicoherentLabel, b: &BicoherentLabel, quad: &QuadratureRule1D) -> Result<C> {
    quad.integrate_checked(|x| bicoherent_eval(a, x).conj() * bicoherent_eval(b, x))
}

/// `∫ d²z2/π K(z1, z2) K(z2, z3)`
pub fn reproduce(z1: C, z3: C, quad: &QuadratureRule2D) -> Result<C> {
    if quad.order() < MIN_REPRODUCE_ORDER {
        return Err(Error::Validation(format!(
            "reproducing integral needs order >= {MIN_REPRODUCE_ORDER}, got {}",
            quad.order()
        )));
    }
    let outer = -0.5 * (z1.norm_sqr() + z3.norm_sqr());
    // e^{-|z2|²} is carried by the weights
    quad.integrate_checked(|z2| (outer + z1.conj() * z2 + z2.conj() * z3).exp())
}

/// Which family is inserted on the left of the resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionOrder {
    /// `∫ |φ(z)⟩⟨Ψ(z)|`
    PhiPsi,
    /// `∫ |Ψ(z)⟩⟨φ(z)|`
    PsiPhi,
}

/// `∫ d²z/π ⟨f|a(z)⟩⟨b(z)|g⟩` for Fock-coefficient vectors `f`, `g`, with
/// `(a, b)` set by `order`. The inner products use `quad1d`.
pub fn resolution_check(
    f: &[C],
    g: &[C],
    params: &ModelParams,
    order: ResolutionOrder,
    quad2d: &QuadratureRule2D,
    quad1d: &QuadratureRule1D,
) -> Result<C> {
    if f.is_empty() || g.is_empty() {
        return Err(Error::Validation("coefficient vectors must be non-empty".into()));
    }
    let (left, right) = match order {
        ResolutionOrder::PhiPsi => (Family::Phi, Family::Psi),
        ResolutionOrder::PsiPhi => (Family::Psi, Family::Phi),
    };
    let integrand = |z: C| {
        let a = BicoherentLabel::new(z, left, *params);
        let b = BicoherentLabel::new(z, right, *params);
        let fa = quad1d.integrate(|x| {
            wavefunctions::fock_state_eval(f, x).conj() * bicoherent_eval_unnormalized(&a, x)
        });
        let bg = quad1d.integrate(|x| {
            bicoherent_eval_unnormalized(&b, x).conj() * wavefunctions::fock_state_eval(g, x)
        });
        fa * bg
    };
    quad2d.integrate_checked(integrand)
}

/// `∫ d²z/π ⟨Ψ(z1)|φ(z)⟩⟨Ψ(z)|φ(z2)⟩` with both overlaps by real-line quadrature.
pub fn extension_check(
    z1: C,
    z2: C,
    params: &ModelParams,
    quad2d: &QuadratureRule2D,
    quad1d: &QuadratureRule1D,
) -> Result<C> {
    let psi1 = BicoherentLabel::psi(z1, *params);
    let phi2 = BicoherentLabel::phi(z2, *params);
    quad2d.integrate_checked(|z| {
        let phi = BicoherentLabel::phi(z, *params);
        let psi = BicoherentLabel::psi(z, *params);
        let left = quad1d.integrate(|x| bicoherent_eval(&psi1, x).conj() * bicoherent_eval_unnormalized(&phi, x));
        let right = quad1d.integrate(|x| bicoherent_eval_unnormalized(&psi, x).conj() * bicoherent_eval(&phi2, x));
        left * right
    })
}
