//! Discretized path integrals: the time-sliced bicoherent chain, the
//! Feynman lattice and the Gelfand–Yaglom determinant.

mod action;
mod gelfand_yaglom;
mod lattice;
mod slicing;

pub use action::{action_z, action_z_complex, TrajectoryPoint};
pub use gelfand_yaglom::{gelfand_yaglom, solve_initial_value, GelfandYaglom, MIN_GY_STEPS};
pub use lattice::{
    feynman_lattice, lattice_determinant, lattice_propagator, LatticeResult,
};
pub use slicing::{
    sliced_analytic, sliced_mc, sliced_quadrature, transfer_matrix_element, SlicedChain,
    DEFAULT_GRID_CAP,
};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceConfig {
    n: usize,
    t_total: f64,
    params: ModelParams,
}

impl SliceConfig {
    pub fn new(n: usize, t_total: f64, params: ModelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("number of slices must be at least 1".into()));
        }
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::Validation(format!(
                "total time must be positive, got {t_total}"
            )));
        }
        Ok(Self { n, t_total, params })
    }

    pub fn slices(&self) -> usize {
        self.n
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    pub fn epsilon(&self) -> f64 {
        self.t_total / self.n as f64
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `t_k = k ε`
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n {
            self.t_total
        } else {
            k as f64 * self.epsilon()
        }
    }
}

/// Monte Carlo settings. Chunk `c` draws from stream `c` of a ChaCha8
/// generator seeded with `seed`; chunk results are reduced in chunk order,
/// so the estimate does not depend on `parallel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
    pub parallel: bool,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64, chunks: usize) -> Result<Self> {
        if samples < 2 || chunks == 0 || chunks > samples {
            return Err(Error::Validation(format!(
                "need samples >= 2 and 1 <= chunks <= samples, got {samples}, {chunks}"
            )));
        }
        Ok(Self {
            samples,
            seed,
            chunks,
            parallel: true,
        })
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Sample mean with its standard error (modulus of the complex error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: C,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: C,
    sum_sq_re: f64,
    sum_sq_im: f64,
}

/// Runs `draw` once per sample across the configured chunks.
pub fn mc_estimate<F>(mc: &McConfig, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> C + Sync,
{
    let per = mc.samples / mc.chunks;
    let extra = mc.samples % mc.chunks;
    let run_chunk = |c: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(c as u64);
        let count = per + usize::from(c < extra);
        let mut m = Moments::default();
        for _ in 0..count {
            let v = draw(&mut rng);
            m.n += 1;
            m.sum += v;
            m.sum_sq_re += v.re * v.re;
            m.sum_sq_im += v.im * v.im;
        }
        m
    };
    let parts: Vec<Moments> = if mc.parallel {
        (0..mc.chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..mc.chunks).map(run_chunk).collect()
    };
    let mut total = Moments::default();
    for p in parts {
        total.n += p.n;
        total.sum += p.sum;
        total.sum_sq_re += p.sum_sq_re;
        total.sum_sq_im += p.sum_sq_im;
    }
    let n = total.n as f64;
    let mean = total.sum / n;
    let var_re = (total.sum_sq_re / n - mean.re * mean.re).max(0.0) * n / (n - 1.0);
    let var_im = (total.sum_sq_im / n - mean.im * mean.im).max(0.0) * n / (n - 1.0);
    McEstimate {
        mean,
        std_error: ((var_re + var_im) / n).sqrt(),
        samples: total.n,
    }
}
