//! Closed-form propagators and the Gaussian-integral route to the position
//! propagator.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::path_integrals::{mc_estimate, McConfig};
use crate::quadrature::QuadratureRule1D;
use crate::wavefunctions::{
    eigenstate_eval, squeeze_apply_analytic, AnalyticGaussian, EigenstateSpec,
};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    BicoherentClosed,
    PositionClosed,
    AppendixGaussian,
    SlicedAnalytic,
    SlicedMc,
    SlicedQuad,
    FeynmanLattice,
    GelfandYaglom,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::BicoherentClosed => "BICOHERENT_CLOSED",
            Method::PositionClosed => "POSITION_CLOSED",
            Method::AppendixGaussian => "APPENDIX_GAUSSIAN",
            Method::SlicedAnalytic => "SLICED_ANALYTIC",
            Method::SlicedMc => "SLICED_MC",
            Method::SlicedQuad => "SLICED_QUAD",
            Method::FeynmanLattice => "FEYNMAN_LATTICE",
            Method::GelfandYaglom => "GELFAND_YAGLOM",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeResult {
    pub value: C,
    pub method: Method,
    pub err_estimate: f64,
    pub meta: BTreeMap<String, f64>,
}

impl AmplitudeResult {
    pub fn new(value: C, method: Method, err_estimate: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Singular(format!("{method} produced a non-finite value")));
        }
        if !(err_estimate >= 0.0) {
            return Err(Error::Validation(format!(
                "error estimate must be non-negative, got {err_estimate}"
            )));
        }
        Ok(Self {
            value,
            method,
            err_estimate,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }
}

/// `D(z_f, z_i; t) = e^{-iωt/2} exp[-(|z_f|² + |z_i|²)/2 + z_f* z_i e^{-iωt}]`
pub fn bicoherent_propagator(params: &ModelParams, z_f: C, z_i: C, t: f64) -> AmplitudeResult {
    let value = bicoherent_propagator_value(params.omega(), z_f, z_i, t);
    AmplitudeResult {
        value,
        method: Method::BicoherentClosed,
        err_estimate: 0.0,
        meta: BTreeMap::new(),
    }
}

pub(crate) fn bicoherent_propagator_value(omega: f64, z_f: C, z_i: C, t: f64) -> C {
    let phase = C::from_polar(1.0, -omega * t);
    (-0.5 * (z_f.norm_sqr() + z_i.norm_sqr()) + z_f.conj() * z_i * phase - I * (0.5 * omega * t))
        .exp()
}

fn position_exponent(params: &ModelParams, x_f: f64, x_i: f64, s: f64, c: f64) -> C {
    let rot2 = C::from_polar(1.0, 2.0 * params.theta());
    I * rot2 / (2.0 * s) * ((x_f * x_f + x_i * x_i) * c - 2.0 * x_f * x_i)
}

/// Closed-form position propagator in the window `0 < ωt < π`, with the
/// principal branch of `√(2πi sin ωt)`.
pub fn position_propagator(params: &ModelParams, x_f: f64, x_i: f64, t: f64) -> Result<AmplitudeResult> {
    let s = params.check_caustic(t)?;
    let wt = params.omega() * t;
    if !(wt > 0.0 && wt < PI) {
        return Err(Error::BranchWindow(wt));
    }
    let c = wt.cos();
    let pre = params.rotation() / (C::new(0.0, 2.0 * PI * s)).sqrt();
    let value = pre * position_exponent(params, x_f, x_i, s, c).exp();
    AmplitudeResult::new(value, Method::PositionClosed, 0.0)
}

/// Position propagator for any `t` away from caustics: `|sin ωt|` in the
/// prefactor and the phase `e^{-iπk/2}`, `k = floor(ωt/π)`.
pub fn position_propagator_extended(
    params: &ModelParams,
    x_f: f64,
    x_i: f64,
    t: f64,
) -> Result<AmplitudeResult> {
    let s = params.check_caustic(t)?;
    let wt = params.omega() * t;
    let k = (wt / PI).floor();
    let c = wt.cos();
    let maslov = C::from_polar(1.0, -FRAC_PI_2 * k);
    let pre = params.rotation() * maslov / (C::new(0.0, 2.0 * PI * s.abs())).sqrt();
    let value = pre * position_exponent(params, x_f, x_i, s, c).exp();
    Ok(AmplitudeResult::new(value, Method::PositionClosed, 0.0)?.with_meta("maslov_index", k))
}

/// Propagator of `h = ω(p² + x²)/2` continued to complex end points, principal
/// window only.
pub fn hermitian_propagator(omega: f64, x_f: C, x_i: C, t: f64) -> Result<C> {
    let wt = omega * t;
    let s = wt.sin();
    if s.abs() < crate::model::DEFAULT_TOL_ANALYTIC {
        return Err(Error::Caustic(s.abs()));
    }
    if !(wt > 0.0 && wt < PI) {
        return Err(Error::BranchWindow(wt));
    }
    let expo = I / (2.0 * s) * ((x_f * x_f + x_i * x_i) * wt.cos() - x_f * x_i * 2.0);
    Ok(expo.exp() / C::new(0.0, 2.0 * PI * s).sqrt())
}

/// `∫ G(x_f, y; t) f(y) dy` by a composite rule centred on `x_f`.
///
/// The window adapts to the Gaussian width of the propagator, so this is
/// meant for short times and `θ != 0`.
pub fn smeared_propagator<F: Fn(f64) -> C>(
    params: &ModelParams,
    x_f: f64,
    t: f64,
    f: F,
) -> Result<C> {
    let s = params.check_caustic(t)?;
    let kappa = (2.0 * params.theta()).sin() * (params.omega() * t).cos() / (2.0 * s);
    if !(kappa > 0.0) {
        return Err(Error::Validation(
            "smearing needs a decaying propagator (0 < θ, 0 < ωt < π/2)".into(),
        ));
    }
    let halfwidth = (9.0 / kappa.sqrt()).min(12.0);
    let width = 1.0 / (kappa.sqrt() + (params.omega() / (2.0 * s)).sqrt());
    let order = ((2.0 * halfwidth / (0.1 * width)).ceil() as usize).max(200);
    let rule = QuadratureRule1D::composite(order, halfwidth)?.with_tol(params.tol_quadrature());
    rule.integrate_checked(|u| {
        let y = x_f + u;
        position_propagator_extended(params, x_f, y, t)
            .map(|g| g.value)
            .unwrap_or(C::new(f64::NAN, 0.0))
            * f(y)
    })
}

/// The Gaussian system `∫ d⁴u/π² exp(-uᵀMu/2 + √2 vᵀu)` behind the position
/// propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixSystem {
    pub m: Matrix4<C>,
    pub v: Vector4<C>,
    pub params: ModelParams,
    pub x_f: f64,
    pub x_i: f64,
    pub t: f64,
}

pub fn appendix_system(params: &ModelParams, x_f: f64, x_i: f64, t: f64) -> AppendixSystem {
    let e = C::from_polar(1.0, -params.omega() * t);
    let one = C::new(1.0, 0.0);
    let three = C::new(3.0, 0.0);
    #[rustfmt::skip]
    let m = Matrix4::new(
        three,  I,     -e,     -I * e,
        I,      one,    I * e, -e,
        -e,     I * e,  three, -I,
        -I * e, -e,    -I,      one,
    );
    let r = params.rotation();
    let v = Vector4::new(r * x_f, I * r * x_f, r * x_i, -I * r * x_i);
    AppendixSystem {
        m,
        v,
        params: *params,
        x_f,
        x_i,
        t,
    }
}

impl AppendixSystem {
    fn e(&self) -> C {
        C::from_polar(1.0, -self.params.omega() * self.t)
    }

    /// `det M = 32 i e^{-iωt} sin ωt`
    pub fn determinant_closed(&self) -> C {
        let wt = self.params.omega() * self.t;
        I * 32.0 * self.e() * wt.sin()
    }

    pub fn determinant_numeric(&self) -> C {
        self.m.lu().determinant()
    }

    /// `{2(1 ± e^{-iωt/2}), 2(1 ± i e^{-iωt/2})}`
    pub fn eigenvalues_closed(&self) -> [C; 4] {
        let h = C::from_polar(1.0, -0.5 * self.params.omega() * self.t);
        let one = C::new(1.0, 0.0);
        [
            (one + h) * 2.0,
            (one - h) * 2.0,
            (one + I * h) * 2.0,
            (one - I * h) * 2.0,
        ]
    }

    pub fn eigenvalues_numeric(&self) -> Result<Vec<C>> {
        crate::fock::eigenvalues(&DMatrix::from_iterator(4, 4, self.m.iter().copied()))
    }

    /// Smallest real part among the eigenvalues of `M`; convergence of the
    /// Gaussian integral needs it to be non-negative.
    pub fn min_eigen_real_part(&self) -> Result<f64> {
        Ok(self
            .eigenvalues_numeric()?
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min))
    }

    /// Displayed inverse `[[q, -iq, 0, 0], [-iq, 3+E², 0, 4E], [0, 0, q, iq],
    /// [0, 4E, iq, 3+E²]] / (4q)` with `E = e^{-iωt}`, `q = 1 - E²`.
    pub fn inverse_closed(&self) -> Result<Matrix4<C>> {
        let e = self.e();
        let q = C::new(1.0, 0.0) - e * e;
        if q.norm() < self.params.tol_analytic() {
            return Err(Error::Singular(format!("1 - e^(-2iwt) = {q}")));
        }
        let z = C::new(0.0, 0.0);
        let d = C::new(3.0, 0.0) + e * e;
        #[rustfmt::skip]
        let inv = Matrix4::new(
            q,      -I * q, z,      z,
            -I * q, d,      z,      e * 4.0,
            z,      z,      q,      I * q,
            z,      e * 4.0, I * q, d,
        );
        Ok(inv / (q * 4.0))
    }

    fn check(&self) -> Result<f64> {
        let s = (self.params.omega() * self.t).sin();
        if s.abs() < self.params.tol_analytic() {
            return Err(Error::Singular(format!(
                "det M vanishes at a caustic (|sin wt| = {:e})",
                s.abs()
            )));
        }
        Ok(s)
    }
}

/// Three evaluations of the appendix integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixIntegral {
    /// `4 exp(vᵀM⁻¹v)/√det M` with `M⁻¹v` and `det M` from an LU factorization.
    pub lu: C,
    /// Same quadratic form with the displayed inverse and determinant.
    pub displayed: C,
    /// `e^{iωt/2}/√(2i sin ωt) · exp{e^{2iθ}/(1 - e^{2iωt}) (x_f² + x_i² - 2e^{iωt} x_f x_i)}`
    pub closed: C,
}

impl AppendixIntegral {
    pub fn max_deviation(&self) -> f64 {
        (self.lu - self.displayed)
            .norm()
            .max((self.lu - self.closed).norm())
            .max((self.displayed - self.closed).norm())
    }
}

#[allow(non_snake_case)]
pub fn appendix_I(sys: &AppendixSystem) -> Result<AppendixIntegral> {
    let s = sys.check()?;
    let lu = sys.m.lu();
    let sol = lu
        .solve(&sys.v)
        .ok_or_else(|| Error::Singular("M is not invertible".into()))?;
    let quad_lu = sys.v.transpose() * sol;
    let det_lu = lu.determinant();
    let lu_value = (quad_lu[(0, 0)]).exp() * 4.0 / det_lu.sqrt();

    let inv = sys.inverse_closed()?;
    let quad_disp = sys.v.transpose() * inv * sys.v;
    let displayed = (quad_disp[(0, 0)]).exp() * 4.0 / sys.determinant_closed().sqrt();

    let wt = sys.params.omega() * sys.t;
    let eiwt = C::from_polar(1.0, wt);
    let rot2 = C::from_polar(1.0, 2.0 * sys.params.theta());
    let (xf, xi) = (sys.x_f, sys.x_i);
    let expo = rot2 / (C::new(1.0, 0.0) - eiwt * eiwt) * (xf * xf + xi * xi - eiwt * (2.0 * xf * xi));
    let closed = C::from_polar(1.0, 0.5 * wt) / C::new(0.0, 2.0 * s).sqrt() * expo.exp();
    Ok(AppendixIntegral {
        lu: lu_value,
        displayed,
        closed,
    })
}

/// Monte Carlo estimate of the appendix integral.
///
/// Samples `u ~ N(0, (Re M)⁻¹)`, so the estimator is
/// `4/√det(Re M) · exp(-i uᵀ Im(M) u / 2 + √2 vᵀu)`.
pub fn appendix_mc(sys: &AppendixSystem, mc: &McConfig) -> Result<AmplitudeResult> {
    sys.check()?;
    let re = sys.m.map(|z| z.re);
    let im = sys.m.map(|z| z.im);
    let chol = re.cholesky().ok_or_else(|| {
        Error::Singular("real part of M is not positive definite".into())
    })?;
    let l = chol.l();
    let det_re = l.diagonal().product().powi(2);
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Cholesky factor is singular".into()))?;
    let scale = 4.0 / det_re.sqrt();
    let v = sys.v;
    let est = mc_estimate(mc, |rng| {
        let xi = nalgebra::Vector4::from_fn(|_, _| StandardNormal.sample(rng));
        let u: nalgebra::Vector4<f64> = lt_inv * xi;
        let quad = (u.transpose() * im * u)[(0, 0)];
        let lin: C = (0..4).map(|k| v[k] * u[k]).sum();
        (lin * std::f64::consts::SQRT_2 - I * (0.5 * quad)).exp() * scale
    });
    Ok(
        AmplitudeResult::new(est.mean, Method::AppendixGaussian, est.std_error)?
            .with_meta("samples", est.samples as f64)
            .with_meta("std_error", est.std_error),
    )
}

/// `G = (e^{iθ}/√π) e^{-iωt/2} exp[-((e^{iθ}x_f)² + (e^{iθ}x_i)²)/2] · I`,
/// with `I` taken from the LU solution of the appendix system.
#[allow(non_snake_case)]
pub fn assemble_G(params: &ModelParams, x_f: f64, x_i: f64, t: f64) -> Result<AmplitudeResult> {
    params.check_caustic(t)?;
    let wt = params.omega() * t;
    if !(wt > 0.0 && wt < PI) {
        return Err(Error::BranchWindow(wt));
    }
    let sys = appendix_system(params, x_f, x_i, t);
    let integral = appendix_I(&sys)?;
    let value = assembly_prefactor(params, x_f, x_i, t) * integral.lu;
    Ok(
        AmplitudeResult::new(value, Method::AppendixGaussian, integral.max_deviation())?
            .with_meta("min_eigen_real_part", sys.min_eigen_real_part()?),
    )
}

pub fn assembly_prefactor(params: &ModelParams, x_f: f64, x_i: f64, t: f64) -> C {
    let r = params.rotation();
    let (uf, ui) = (r * x_f, r * x_i);
    r / PI.sqrt()
        * C::from_polar(1.0, -0.5 * params.omega() * t)
        * (-(uf * uf + ui * ui) * 0.5).exp()
}

/// `A(t) = ⟨φ_n|g e^{-iHt}|φ_n⟩` evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenstateAmplitude {
    /// `e^{-iE_n t} ⟨φ_n|g φ_n⟩`
    pub analytic: C,
    /// `⟨g φ_n| ∫ G(·, y; t) φ_n(y) dy⟩`, all by quadrature
    pub quadrature: C,
}

/// `g φ_n` obtained by applying the inverse squeeze twice to the closed-form
/// eigenfunction.
pub fn metric_applied(spec: &EigenstateSpec) -> Result<AnalyticGaussian> {
    let f = AnalyticGaussian::eigenstate(spec)?;
    let inv = spec.params.negated();
    squeeze_apply_analytic(&inv, &squeeze_apply_analytic(&inv, &f)?)
}

/// Largest `ωτ` of a single propagation step in the quadrature route.
const MAX_STEP_PHASE: f64 = std::f64::consts::FRAC_PI_4;

/// Propagates `f` on a trapezoid grid of `points + 1` nodes on `[-l, l]`,
/// splitting `t` into steps short enough for the kernel to decay.
fn propagate_on_grid<F: Fn(f64) -> C>(
    params: &ModelParams,
    f: F,
    t: f64,
    l: f64,
    points: usize,
) -> Result<(Vec<f64>, Vec<C>)> {
    let h = 2.0 * l / points as f64;
    let nodes: Vec<f64> = (0..=points).map(|k| -l + k as f64 * h).collect();
    let weight = |k: usize| if k == 0 || k == points { 0.5 * h } else { h };
    let mut values: Vec<C> = nodes.iter().map(|&x| f(x)).collect();
    let steps = (params.omega() * t / MAX_STEP_PHASE).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    for _ in 0..steps {
        values = nodes
            .par_iter()
            .map(|&x| {
                let mut acc = C::new(0.0, 0.0);
                for (k, &y) in nodes.iter().enumerate() {
                    acc += position_propagator(params, x, y, tau)?.value * values[k] * weight(k);
                }
                Ok(acc)
            })
            .collect::<Result<Vec<C>>>()?;
    }
    Ok((nodes, values.into_iter().enumerate().map(|(k, v)| v * weight(k)).collect()))
}

pub fn eigenstate_amplitude(params: &ModelParams, n: usize, t: f64) -> Result<EigenstateAmplitude> {
    let spec = EigenstateSpec::phi(n, *params);
    let g_phi = metric_applied(&spec)?;
    let quad = QuadratureRule1D::standard().with_tol(params.tol_quadrature());
    let norm = quad.integrate_checked(|x| g_phi.eval(x).conj() * eigenstate_eval(&spec, x))?;
    let energy = crate::model::energy_level(params, n);
    let analytic = C::from_polar(1.0, -energy * t) * norm;
    let quadrature = if t == 0.0 {
        norm
    } else {
        params.check_caustic(t)?;
        // the weighted values already carry the outer trapezoid weights
        let route = |points: usize| -> Result<C> {
            let (nodes, weighted) = propagate_on_grid(params, |y| eigenstate_eval(&spec, y), t, 14.0, points)?;
            Ok(nodes.iter().zip(&weighted).map(|(&x, &v)| g_phi.eval(x).conj() * v).sum())
        };
        let coarse = route(560)?;
        let fine = route(840)?;
        let delta = (fine - coarse).norm();
        let tol = params.tol_quadrature();
        if !(delta <= tol) {
            return Err(Error::NonConverged { delta, tol });
        }
        fine
    };
    Ok(EigenstateAmplitude {
        analytic,
        quadrature,
    })
}
