//! Acceptance checks. Each function runs one criterion at its stated
//! tolerance and reports the worst measured deviation.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bicoherent::{kernel, overlap, reproduce, BicoherentLabel};
use crate::error::Result;
use crate::fock::{self, InteriorBlock};
use crate::model::{energy_level, ModelParams};
use crate::path_integrals::{
    feynman_lattice, sliced_analytic, sliced_mc, sliced_quadrature, solve_initial_value, McConfig,
    SliceConfig, DEFAULT_GRID_CAP,
};
use crate::propagators::{
    appendix_I, appendix_system, assemble_G, assembly_prefactor, bicoherent_propagator,
    eigenstate_amplitude, position_propagator, smeared_propagator,
};
use crate::quadrature::{QuadratureRule1D, QuadratureRule2D};
use crate::wavefunctions::{eigenstate_eval, eigenstate_norm_sq, EigenstateSpec};

type C = Complex64;

pub const DIM: usize = 64;
pub const KEEP: usize = 20;
pub const SEED: u64 = 20_240_611;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen, in the units of `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub elapsed: f64,
    pub detail: String,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<20} measured {:.3e} tol {:.1e} ({:.2} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.measured,
            self.tolerance,
            self.elapsed,
            self.detail
        )
    }
}

struct Check {
    criterion: u8,
    name: &'static str,
    tolerance: f64,
    budget: Option<f64>,
    start: Instant,
}

impl Check {
    fn start(criterion: u8, name: &'static str, tolerance: f64, budget: Option<f64>) -> Self {
        Self {
            criterion,
            name,
            tolerance,
            budget,
            start: Instant::now(),
        }
    }

    fn finish(self, outcome: Result<(f64, bool, String)>) -> CheckReport {
        let elapsed = self.start.elapsed().as_secs_f64();
        let (measured, ok, mut detail) = match outcome {
            Ok(v) => v,
            Err(e) => (f64::NAN, false, format!("error: {e}")),
        };
        let mut passed = ok && measured <= self.tolerance;
        if let Some(b) = self.budget {
            if elapsed > b {
                passed = false;
                detail.push_str(&format!(" runtime {elapsed:.2} s exceeds {b} s"));
            }
        }
        CheckReport {
            criterion: self.criterion,
            name: self.name,
            passed,
            measured,
            tolerance: self.tolerance,
            elapsed,
            detail: detail.trim().to_string(),
        }
    }
}

fn params(theta: f64) -> ModelParams {
    ModelParams::new(theta).expect("angle inside the Stokes wedge")
}

fn random_label(rng: &mut ChaCha8Rng) -> C {
    let r: f64 = 1.5 * rng.random::<f64>().sqrt();
    let a: f64 = 2.0 * PI * rng.random::<f64>();
    C::from_polar(r, a)
}

/// Lowest eight eigenvalues of the truncated `H` against `ω(n + 1/2)`.
pub fn spectrum() -> CheckReport {
    let check = Check::start(1, "spectrum", 1e-6, Some(5.0));
    let outcome = (|| {
        let mut worst = 0.0f64;
        let mut worst_im = 0.0f64;
        let mut detail = String::new();
        for theta in [0.0, 0.3, -0.3, 0.6, -0.6] {
            let p = params(theta);
            let ev = fock::hamiltonian(&p, DIM)?.eigenvalues()?;
            let mut err = 0.0f64;
            let mut im = 0.0f64;
            for (n, e) in ev.iter().take(8).enumerate() {
                err = err.max((e.re - energy_level(&p, n)).abs());
                im = im.max(e.im.abs());
            }
            detail.push_str(&format!("θ={theta}: {err:.1e}/{im:.1e} "));
            worst = worst.max(err);
            worst_im = worst_im.max(im);
        }
        Ok((worst, worst_im < 1e-8, detail))
    })();
    check.finish(outcome)
}

/// Commutators, quasi-hermiticity and the similarity on the interior block.
pub fn algebra() -> CheckReport {
    let check = Check::start(2, "algebra", 1e-8, None);
    let outcome = (|| {
        let p = params(0.3);
        let block = InteriorBlock::new(KEEP, DIM)?;
        let (a, b) = fock::pseudo_boson_ops(&p, DIM)?;
        let ab = a.commutator(&b).interior_deviation_from_scalar(C::from(1.0), block);
        let aa = a
            .commutator(&a.adjoint())
            .interior_deviation_from_scalar(C::from((2.0 * p.theta()).cos()), block);
        let h = fock::hamiltonian(&p, DIM)?;
        let g = fock::metric_op(&p, DIM)?;
        let quasi = h.adjoint().mul(&g).interior_deviation(&g.mul(&h), block);
        let t = fock::squeeze_op(&p, DIM)?;
        let t_inv = fock::squeeze_op_inverse(&p, DIM)?;
        let small_h = fock::hermitian_partner(&p, DIM)?;
        let sim = t.mul(&small_h).mul(&t_inv).interior_deviation(&h, block);
        let worst = ab.max(aa).max(quasi).max(sim);
        let detail = format!("[A,B] {ab:.1e} [A,A†] {aa:.1e} H†g-gH {quasi:.1e} ThT⁻¹-H {sim:.1e}");
        Ok((worst, true, detail))
    })();
    check.finish(outcome)
}

/// Real-line overlaps of bicoherent states against the kernel, and across angles.
pub fn kernel_overlap() -> CheckReport {
    let check = Check::start(3, "kernel", 1e-7, None);
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let quad = QuadratureRule1D::standard().with_tol(1e-9);
        let mut worst = 0.0f64;
        let mut spread = 0.0f64;
        for _ in 0..10 {
            let (z1, z2) = (random_label(&mut rng), random_label(&mut rng));
            let want = kernel(z1, z2);
            let mut values = Vec::new();
            for theta in [0.0, 0.3, 0.6] {
                let p = params(theta);
                let v = overlap(&BicoherentLabel::psi(z1, p), &BicoherentLabel::phi(z2, p), &quad)?;
                worst = worst.max((v - want).norm());
                values.push(v);
            }
            for i in 0..values.len() {
                for j in i + 1..values.len() {
                    spread = spread.max((values[i] - values[j]).norm());
                }
            }
        }
        Ok((worst.max(spread), true, format!("kernel {worst:.1e} across θ {spread:.1e}")))
    })();
    check.finish(outcome)
}

/// `∫ d²z2/π K(z1, z2) K(z2, z3) = K(z1, z3)` on the order-40 grid.
pub fn reproducing() -> CheckReport {
    let check = Check::start(4, "reproducing", 1e-7, Some(10.0));
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        let quad = QuadratureRule2D::new(40)?.with_tol(1e-7);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let (z1, z3) = (random_label(&mut rng), random_label(&mut rng));
            let v = reproduce(z1, z3, &quad)?;
            worst = worst.max((v - kernel(z1, z3)).norm());
        }
        Ok((worst, true, String::new()))
    })();
    check.finish(outcome)
}

fn match_multiset(a: &[C], b: &[C]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .unwrap_or((0, f64::INFINITY));
        if k < used.len() {
            used[k] = true;
        }
        worst = worst.max(d);
    }
    worst
}

/// Closed form, both displayed appendix forms and the LU assembly on a 27-point grid.
pub fn cross_routes() -> CheckReport {
    let check = Check::start(5, "propagator-routes", 1e-10, None);
    let outcome = (|| {
        let mut worst_route = 0.0f64;
        let mut worst_matrix = 0.0f64;
        let mut min_re = f64::INFINITY;
        for theta in [-0.3, 0.0, 0.3] {
            let p = params(theta);
            for (xf, xi) in [(0.6, -0.4), (-1.0, 0.3), (0.0, 1.2)] {
                for wt in [0.5, 1.5, 2.7] {
                    let t = wt / p.omega();
                    let closed = position_propagator(&p, xf, xi, t)?.value;
                    let sys = appendix_system(&p, xf, xi, t);
                    let integral = appendix_I(&sys)?;
                    let pre = assembly_prefactor(&p, xf, xi, t);
                    let routes = [
                        closed,
                        pre * integral.displayed,
                        pre * integral.closed,
                        assemble_G(&p, xf, xi, t)?.value,
                    ];
                    for i in 0..routes.len() {
                        for j in i + 1..routes.len() {
                            worst_route = worst_route.max((routes[i] - routes[j]).norm());
                        }
                    }
                    let det = (sys.determinant_numeric() - sys.determinant_closed()).norm();
                    let ev = match_multiset(&sys.eigenvalues_numeric()?, &sys.eigenvalues_closed());
                    worst_matrix = worst_matrix.max(det).max(ev);
                    min_re = min_re.min(sys.min_eigen_real_part()?);
                }
            }
        }
        Ok((
            worst_route.max(worst_matrix),
            true,
            format!("routes {worst_route:.1e} det/eig {worst_matrix:.1e} min Re λ {min_re:.2e}"),
        ))
    })();
    check.finish(outcome)
}

/// Sliced chain: exact at every `N`, quadrature at `N = 2`, Monte Carlo at `N = 2`.
pub fn sliced() -> CheckReport {
    let check = Check::start(6, "sliced-bicoherent", 1e-8, None);
    let outcome = (|| {
        let p = params(0.3);
        let t = 0.9;
        let (zf, zi) = (C::new(0.3, -0.2), C::new(-0.5, 0.4));
        let exact = bicoherent_propagator(&p, zf, zi, t).value;
        let mut analytic = 0.0f64;
        for k in 0..=8 {
            let cfg = SliceConfig::new(1 << k, t, p)?;
            analytic = analytic.max((sliced_analytic(&cfg, zf, zi).value - exact).norm());
        }
        let cfg = SliceConfig::new(2, t, p)?;
        let quad = QuadratureRule2D::new(40)?.with_tol(1e-8);
        let q = sliced_quadrature(&cfg, zf, zi, &quad, DEFAULT_GRID_CAP)?;
        let quad_err = (q.value - exact).norm();
        let mc = sliced_mc(&cfg, zf, zi, &McConfig::new(1_000_000, SEED, 16)?)?;
        let mc_z = (mc.value - exact).norm() / mc.err_estimate;
        let ok = analytic < 1e-13 && mc_z < 3.0;
        Ok((
            quad_err,
            ok,
            format!("analytic {analytic:.1e} (tol 1e-13) quadrature {quad_err:.1e} mc {mc_z:.2}σ"),
        ))
    })();
    check.finish(outcome)
}

/// Lattice convergence and the Runge–Kutta order of the Gelfand–Yaglom solve.
pub fn lattice() -> CheckReport {
    let check = Check::start(7, "feynman-lattice", 1e-3, Some(30.0));
    let outcome = (|| {
        let p = params(0.3);
        let t = 1.2 / p.omega();
        let (xf, xi) = (0.6, -0.4);
        let exact = position_propagator(&p, xf, xi, t)?.value;
        let mut errs = Vec::new();
        for n in [256, 1024, 4096] {
            let v = feynman_lattice(&p, xf, xi, t, n)?.amplitude.value;
            errs.push((v - exact).norm() / exact.norm());
        }
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        let w = p.omega();
        let f_exact = (w * t).sin() / w;
        let e1 = (solve_initial_value(w, t, 100) - f_exact).abs();
        let e2 = (solve_initial_value(w, t, 200) - f_exact).abs();
        let order = (e1 / e2).log2();
        let order_ok = (order - 4.0).abs() < 0.2;
        Ok((
            errs[2],
            decreasing && order_ok,
            format!("errors {:.1e} {:.1e} {:.1e} ODE order {order:.3}", errs[0], errs[1], errs[2]),
        ))
    })();
    check.finish(outcome)
}

/// Smeared propagator against `e^{-x²}` as `t → 0`.
pub fn delta_limit() -> CheckReport {
    let check = Check::start(8, "delta-limit", 1e-2, None);
    let outcome = (|| {
        let p = params(0.3);
        let f = |x: f64| C::from((-x * x).exp());
        let err = |t: f64| -> Result<f64> {
            let mut worst = 0.0f64;
            for k in 0..=40 {
                let x = -2.0 + 0.1 * k as f64;
                worst = worst.max((smeared_propagator(&p, x, t, f)? - f(x)).norm());
            }
            Ok(worst)
        };
        let (coarse, fine) = (err(1e-2)?, err(1e-3)?);
        let ratio = coarse / fine;
        Ok((fine, ratio >= 5.0, format!("t=1e-2 {coarse:.1e} ratio {ratio:.1}")))
    })();
    check.finish(outcome)
}

/// Eigenstate amplitudes keep unit modulus; `e^{iH†t} g e^{-iHt} = g`.
pub fn unitarity() -> CheckReport {
    let check = Check::start(9, "unitarity", 1e-8, None);
    let outcome = (|| {
        let p = params(0.3);
        let mut worst = 0.0f64;
        for n in 0..=3 {
            let base = eigenstate_amplitude(&p, n, 0.0)?.quadrature;
            for t in [0.5, 1.7] {
                let a = eigenstate_amplitude(&p, n, t)?.quadrature;
                worst = worst.max(((a / base).norm() - 1.0).abs());
            }
        }
        let block = InteriorBlock::new(KEEP, DIM)?;
        let h = fock::hamiltonian(&p, DIM)?;
        let g = fock::metric_op(&p, DIM)?;
        let mut conj = 0.0f64;
        for t in [0.5, 1.7] {
            let u = fock::evolution(&h, t, p.tol_analytic())?;
            let lhs = u.adjoint().mul(&g).mul(&u);
            conj = conj.max(lhs.interior_deviation(&g, block));
        }
        Ok((
            worst,
            conj < 1e-6,
            format!("metric conjugation {conj:.1e} (tol 1e-6)"),
        ))
    })();
    check.finish(outcome)
}

/// Quadrature norms of `φ_n` against the Legendre formula.
pub fn norm_growth() -> CheckReport {
    let check = Check::start(10, "norm-growth", 1e-6, None);
    let outcome = (|| {
        let p = params(0.3);
        let quad = QuadratureRule1D::standard().with_tol(1e-9);
        let mut worst = 0.0f64;
        let mut last = 0.0;
        let mut monotone = true;
        for n in 0..=10 {
            let spec = EigenstateSpec::phi(n, p);
            let q = quad.integrate_checked(|x| C::from(eigenstate_eval(&spec, x).norm_sqr()))?.re;
            let want = eigenstate_norm_sq(&spec)?;
            worst = worst.max((q / want - 1.0).abs());
            monotone &= q > last;
            last = q;
        }
        Ok((worst, monotone, format!("monotone {monotone}")))
    })();
    check.finish(outcome)
}

/// All ten criteria in order.
pub fn all() -> Vec<CheckReport> {
    vec![
        spectrum(),
        algebra(),
        kernel_overlap(),
        reproducing(),
        cross_routes(),
        sliced(),
        lattice(),
        delta_limit(),
        unitarity(),
        norm_growth(),
    ]
}
