//! The time-sliced bicoherent path integral
//!
//! ```text
//! D(z_f, z_i; t) = ∫ Π_{k=1}^{N-1} d²z_k/π  Π_{l=1}^{N} D(z_l, z_{l-1}; ε)
//! ```

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::{mc_estimate, McConfig, SliceConfig};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::propagators::{bicoherent_propagator_value, AmplitudeResult, Method};
use crate::quadrature::QuadratureRule2D;

type C = Complex64;

/// Default cap on kernel evaluations for the quadrature chain.
pub const DEFAULT_GRID_CAP: u128 = 2_000_000_000;

/// `e^{-iωε/2} exp[-(|z_l|² + |z_prev|²)/2 + z_l* z_prev e^{-iωε}]`
pub fn transfer_matrix_element(params: &ModelParams, z_l: C, z_prev: C, epsilon: f64) -> C {
    bicoherent_propagator_value(params.omega(), z_l, z_prev, epsilon)
}

// transfer element with the label normalizations stripped
fn reduced_transfer(coupling: C, half_phase: C, z_l: C, z_prev: C) -> C {
    (z_l.conj() * z_prev * coupling).exp() * half_phase
}

/// Record of the symbolic chain: after `k` integrations the surviving
/// coupling `z_{k+1}* z_0` carries the phase `e^{-i phase_steps[k] ωε}` and the
/// accumulated prefactor `e^{-i prefactor_steps[k] ωε/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedChain {
    pub omega_epsilon: f64,
    pub phase_steps: Vec<u64>,
    pub prefactor_steps: Vec<u64>,
}

impl SlicedChain {
    pub fn build(config: &SliceConfig) -> Self {
        let n = config.slices() as u64;
        let mut phase_steps = Vec::with_capacity(n as usize);
        let mut prefactor_steps = Vec::with_capacity(n as usize);
        // one slice: D(z_1, z_0; ε)
        let (mut phase, mut pre) = (1u64, 1u64);
        phase_steps.push(phase);
        prefactor_steps.push(pre);
        for _ in 1..n {
            // ∫ d²z/π e^{-|z|²} e^{a z* ... } : the new slice contributes one
            // coupling phase and one half-phase; the Gaussian integral
            // e^{w2* z + z* w1} -> e^{w2* w1} multiplies the couplings
            phase += 1;
            pre += 1;
            phase_steps.push(phase);
            prefactor_steps.push(pre);
        }
        Self {
            omega_epsilon: config.params().omega() * config.epsilon(),
            phase_steps,
            prefactor_steps,
        }
    }

    /// Coupling phase angle after `k` integrations, `-k' ωε`.
    pub fn coupling_angle(&self, k: usize) -> f64 {
        -(self.phase_steps[k] as f64) * self.omega_epsilon
    }

    pub fn value(&self, z_f: C, z_i: C) -> C {
        let last = self.phase_steps.len() - 1;
        let angle = self.coupling_angle(last);
        let half = -0.5 * (self.prefactor_steps[last] as f64) * self.omega_epsilon;
        (-0.5 * (z_f.norm_sqr() + z_i.norm_sqr())
            + z_f.conj() * z_i * C::from_polar(1.0, angle)
            + C::new(0.0, half))
        .exp()
    }
}

/// N-slice chain with every inner integral done in closed form.
pub fn sliced_analytic(config: &SliceConfig, z_f: C, z_i: C) -> AmplitudeResult {
    let chain = SlicedChain::build(config);
    AmplitudeResult {
        value: chain.value(z_f, z_i),
        method: Method::SlicedAnalytic,
        err_estimate: 0.0,
        meta: [("slices".to_string(), config.slices() as f64)].into(),
    }
}

fn contract(config: &SliceConfig, z_f: C, z_i: C, quad: &QuadratureRule2D) -> C {
    let eps = config.epsilon();
    let w = config.params().omega();
    let coupling = C::from_polar(1.0, -w * eps);
    let half = C::from_polar(1.0, -0.5 * w * eps);
    let outer = (-0.5 * (z_f.norm_sqr() + z_i.norm_sqr())).exp();
    let n = config.slices();
    if n == 1 {
        return transfer_matrix_element(config.params(), z_f, z_i, eps);
    }
    let points = quad.points();
    // u_j = t(z_j, z_i) after the first slice
    let mut u: Vec<C> = points
        .iter()
        .map(|(z, _)| reduced_transfer(coupling, half, *z, z_i))
        .collect();
    for _ in 2..n {
        let weighted: Vec<C> = u.iter().zip(&points).map(|(v, (_, wk))| v * wk).collect();
        u = points
            .iter()
            .map(|(zj, _)| {
                points
                    .iter()
                    .zip(&weighted)
                    .map(|((zk, _), v)| reduced_transfer(coupling, half, *zj, *zk) * v)
                    .sum()
            })
            .collect();
    }
    let last: C = points
        .iter()
        .zip(&u)
        .map(|((zk, wk), v)| reduced_transfer(coupling, half, z_f, *zk) * v * wk)
        .sum();
    last * outer
}

fn grid_cost(n: usize, order: usize) -> u128 {
    let nodes = (order as u128).pow(2);
    nodes * nodes * (n.saturating_sub(2) as u128) + 2 * nodes
}

/// Chain contracted slice by slice on the tensor Gauss–Hermite grid, checked
/// against the grid of twice the order.
pub fn sliced_quadrature(
    config: &SliceConfig,
    z_f: C,
    z_i: C,
    quad: &QuadratureRule2D,
    cap: u128,
) -> Result<AmplitudeResult> {
    let n = config.slices();
    if n == 1 {
        let v = transfer_matrix_element(config.params(), z_f, z_i, config.epsilon());
        return AmplitudeResult::new(v, Method::SlicedQuad, 0.0);
    }
    let fine_quad = QuadratureRule2D::new(2 * quad.order())?;
    let needed = grid_cost(n, quad.order()) + grid_cost(n, fine_quad.order());
    if needed > cap {
        return Err(Error::Budget { needed, cap });
    }
    let coarse = contract(config, z_f, z_i, quad);
    let fine = contract(config, z_f, z_i, &fine_quad);
    let delta = (fine - coarse).norm();
    let tol = quad.tol();
    if !(delta <= tol) {
        return Err(Error::NonConverged { delta, tol });
    }
    Ok(AmplitudeResult::new(coarse, Method::SlicedQuad, delta)?
        .with_meta("order", quad.order() as f64)
        .with_meta("kernel_evaluations", needed as f64))
}

/// Monte Carlo over the inner labels, each drawn from `e^{-|z|²}/π`.
pub fn sliced_mc(config: &SliceConfig, z_f: C, z_i: C, mc: &McConfig) -> Result<AmplitudeResult> {
    let n = config.slices();
    if n < 2 {
        return Err(Error::Validation("Monte Carlo needs at least two slices".into()));
    }
    let eps = config.epsilon();
    let w = config.params().omega();
    let coupling = C::from_polar(1.0, -w * eps);
    let half = C::from_polar(1.0, -0.5 * w * eps);
    let outer = (-0.5 * (z_f.norm_sqr() + z_i.norm_sqr())).exp();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let est = mc_estimate(mc, |rng| {
        let mut prev = z_i;
        let mut prod = C::new(outer, 0.0);
        for _ in 1..n {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let z = C::new(a * r, b * r);
            prod *= reduced_transfer(coupling, half, z, prev);
            prev = z;
        }
        prod * reduced_transfer(coupling, half, z_f, prev)
    });
    Ok(AmplitudeResult::new(est.mean, Method::SlicedMc, est.std_error)?
        .with_meta("samples", est.samples as f64)
        .with_meta("std_error", est.std_error))
}
