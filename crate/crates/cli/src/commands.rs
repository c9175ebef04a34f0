use std::f64::consts::PI;

use bicoherent_core::bicoherent::{kernel, overlap, BicoherentLabel};
use bicoherent_core::fock;
use bicoherent_core::model::{classical_action, energy_level, ClassicalPath};
use bicoherent_core::path_integrals::{
    feynman_lattice, gelfand_yaglom, sliced_analytic, sliced_mc, sliced_quadrature, McConfig,
    SliceConfig, DEFAULT_GRID_CAP,
};
use bicoherent_core::propagators::{
    appendix_I, appendix_system, assemble_G, assembly_prefactor, bicoherent_propagator,
    position_propagator, Method,
};
use bicoherent_core::quadrature::{QuadratureRule1D, QuadratureRule2D};
use bicoherent_core::verify;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, Subcommand};
use crate::error::{CliError, Result};
use crate::records::{Meta, RecordSet, Row};

type C = Complex64;

const SPECTRUM_LEVELS: usize = 10;
const MC_CHUNKS: usize = 16;

fn meta(cfg: &RunConfig) -> Meta {
    let parameters = Row::new()
        .with("subcommand", cfg.subcommand.name())
        .with("theta", cfg.params.theta())
        .with("omega", cfg.params.omega())
        .with("t", cfg.t)
        .with("dim", cfg.dim)
        .with("slices", cfg.slices)
        .with("samples", cfg.samples)
        .with("order", cfg.order)
        .with("xf", cfg.xf)
        .with("xi", cfg.xi)
        .with("zf", cfg.zf)
        .with("zi", cfg.zi);
    Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        parameters,
        seed: cfg.seed,
    }
}

fn spectrum(cfg: &RunConfig) -> Result<Vec<Row>> {
    let ev = fock::hamiltonian(&cfg.params, cfg.dim)?.eigenvalues()?;
    Ok(ev
        .iter()
        .take(SPECTRUM_LEVELS)
        .enumerate()
        .map(|(n, e)| {
            let want = energy_level(&cfg.params, n);
            Row::new()
                .with("n", n)
                .with("e_formula", want)
                .with("e_truncated", *e)
                .with("abs_err", (e - want).norm())
        })
        .collect())
}

fn propagate(cfg: &RunConfig) -> Result<Vec<Row>> {
    let p = &cfg.params;
    let (xf, xi, t) = (cfg.xf, cfg.xi, cfg.t);
    let closed = position_propagator(p, xf, xi, t)?.value;
    let sys = appendix_system(p, xf, xi, t);
    let integral = appendix_I(&sys)?;
    let pre = assembly_prefactor(p, xf, xi, t);
    let assembled = assemble_G(p, xf, xi, t)?;
    let exact = [
        closed,
        pre * integral.lu,
        pre * integral.displayed,
        pre * integral.closed,
        assembled.value,
    ];
    let mut max_dev = 0.0f64;
    for i in 0..exact.len() {
        for j in i + 1..exact.len() {
            max_dev = max_dev.max((exact[i] - exact[j]).norm());
        }
    }
    let lattice = feynman_lattice(p, xf, xi, t, cfg.slices.max(2))?.amplitude;
    let path = ClassicalPath::new(xi, xf, t, *p)?;
    let gy = gelfand_yaglom(p, t, cfg.slices.max(bicoherent_core::path_integrals::MIN_GY_STEPS))?;
    let gy_value = gy.prefactor * (C::i() * classical_action(&path)?).exp();
    Ok(vec![Row::new()
        .with(Method::PositionClosed.tag(), closed)
        .with("APPENDIX_LU", exact[1])
        .with("APPENDIX_DISPLAYED", exact[2])
        .with("APPENDIX_CLOSED", exact[3])
        .with("BICOHERENT_ASSEMBLY", exact[4])
        .with(Method::FeynmanLattice.tag(), lattice.value)
        .with(Method::GelfandYaglom.tag(), gy_value)
        .with("max_pairwise_deviation", max_dev)
        .with("lattice_deviation", (lattice.value - closed).norm())
        .with("gelfand_yaglom_deviation", (gy_value - closed).norm())
        .with("min_eigen_real_part", sys.min_eigen_real_part()?)])
}

fn kernel_rows(cfg: &RunConfig) -> Result<Vec<Row>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let quad = QuadratureRule1D::standard().with_tol(cfg.params.tol_quadrature());
    let mut rows = Vec::new();
    for _ in 0..cfg.pairs {
        let mut label = || C::from_polar(1.5 * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
        let (z1, z2) = (label(), label());
        let closed = kernel(z1, z2);
        let q = overlap(
            &BicoherentLabel::psi(z1, cfg.params),
            &BicoherentLabel::phi(z2, cfg.params),
            &quad,
        )?;
        rows.push(
            Row::new()
                .with("z1", z1)
                .with("z2", z2)
                .with("closed", closed)
                .with("quadrature", q)
                .with("abs_err", (q - closed).norm()),
        );
    }
    Ok(rows)
}

fn slice_converge(cfg: &RunConfig) -> Result<Vec<Row>> {
    let p = cfg.params;
    let exact = bicoherent_propagator(&p, cfg.zf, cfg.zi, cfg.t).value;
    let mut rows = Vec::new();
    let mut n = 1;
    while n <= cfg.slices {
        let sc = SliceConfig::new(n, cfg.t, p)?;
        let v = sliced_analytic(&sc, cfg.zf, cfg.zi);
        rows.push(
            Row::new()
                .with("method", v.method.tag())
                .with("slices", n)
                .with("value", v.value)
                .with("abs_err", (v.value - exact).norm())
                .with("err_estimate", v.err_estimate),
        );
        n *= 2;
    }
    let sc = SliceConfig::new(2, cfg.t, p)?;
    let quad = QuadratureRule2D::new(cfg.order)?.with_tol(p.tol_quadrature());
    let q = sliced_quadrature(&sc, cfg.zf, cfg.zi, &quad, DEFAULT_GRID_CAP)?;
    rows.push(
        Row::new()
            .with("method", q.method.tag())
            .with("slices", 2usize)
            .with("value", q.value)
            .with("abs_err", (q.value - exact).norm())
            .with("err_estimate", q.err_estimate),
    );
    let mc = McConfig::new(cfg.samples, cfg.seed, MC_CHUNKS.min(cfg.samples))?;
    let m = sliced_mc(&sc, cfg.zf, cfg.zi, &mc)?;
    rows.push(
        Row::new()
            .with("method", m.method.tag())
            .with("slices", 2usize)
            .with("value", m.value)
            .with("abs_err", (m.value - exact).norm())
            .with("err_estimate", m.err_estimate),
    );
    Ok(rows)
}

fn feynman_converge(cfg: &RunConfig) -> Result<Vec<Row>> {
    let p = &cfg.params;
    let exact = position_propagator(p, cfg.xf, cfg.xi, cfg.t)?.value;
    let mut rows = Vec::new();
    let mut n = 16.min(cfg.slices);
    loop {
        let r = feynman_lattice(p, cfg.xf, cfg.xi, cfg.t, n)?;
        rows.push(
            Row::new()
                .with("method", r.amplitude.method.tag())
                .with("slices", n)
                .with("value", r.amplitude.value)
                .with("rel_err", (r.amplitude.value - exact).norm() / exact.norm())
                .with("err_estimate", r.amplitude.err_estimate),
        );
        if n >= cfg.slices {
            break;
        }
        n = (2 * n).min(cfg.slices);
    }
    let steps = cfg.slices.max(bicoherent_core::path_integrals::MIN_GY_STEPS);
    let gy = gelfand_yaglom(p, cfg.t, steps)?;
    let f_exact = (p.omega() * cfg.t).sin() / p.omega();
    rows.push(
        Row::new()
            .with("method", Method::GelfandYaglom.tag())
            .with("slices", steps)
            .with("value", gy.prefactor)
            .with("rel_err", (gy.f_t / f_exact - 1.0).abs()),
    );
    Ok(rows)
}

fn verify_rows() -> (Vec<Row>, usize) {
    let reports = verify::all();
    let failed = reports.iter().filter(|r| !r.passed).count();
    let rows = reports
        .into_iter()
        .map(|r| {
            Row::new()
                .with("criterion", r.criterion as usize)
                .with("name", r.name)
                .with("passed", r.passed)
                .with("measured", r.measured)
                .with("tolerance", r.tolerance)
                .with("elapsed", r.elapsed)
                .with("detail", r.detail)
        })
        .collect();
    (rows, failed)
}

/// Runs one subcommand. The record set is returned together with the
/// status that should follow it (failed acceptance checks still produce
/// their report).
pub fn run(cfg: &RunConfig) -> Result<(RecordSet, Option<CliError>)> {
    let mut status = None;
    let rows = match cfg.subcommand {
        Subcommand::Spectrum => spectrum(cfg)?,
        Subcommand::Propagate => propagate(cfg)?,
        Subcommand::Kernel => kernel_rows(cfg)?,
        Subcommand::SliceConverge => slice_converge(cfg)?,
        Subcommand::FeynmanConverge => feynman_converge(cfg)?,
        Subcommand::Verify => {
            let (rows, failed) = verify_rows();
            if failed > 0 {
                status = Some(CliError::ChecksFailed(failed));
            }
            rows
        }
    };
    Ok((
        RecordSet {
            meta: meta(cfg),
            rows,
        },
        status,
    ))
}
