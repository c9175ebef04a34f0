use bicoherent_core::path_integrals::{
    feynman_lattice, gelfand_yaglom, lattice_determinant, sliced_mc, McConfig, SliceConfig,
};
use bicoherent_core::propagators::{bicoherent_propagator, position_propagator};
use bicoherent_core::ModelParams;
use num_complex::Complex64 as C;

#[test]
fn lattice_error_follows_a_power_law() {
    let p = ModelParams::new(0.3).unwrap();
    let t = 1.2 / p.omega();
    let exact = position_propagator(&p, 0.6, -0.4, t).unwrap().value;
    let ns = [64usize, 128, 256, 512, 1024];
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let v = feynman_lattice(&p, 0.6, -0.4, t, n).unwrap().amplitude.value;
            ((n as f64).ln(), ((v - exact).norm() / exact.norm()).ln())
        })
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope < -1.5, "slope {slope}");
}

#[test]
fn gelfand_yaglom_agrees_with_the_fine_lattice() {
    let p = ModelParams::new(-0.3).unwrap();
    for t in [0.4, 1.1, 2.0] {
        let gy = gelfand_yaglom(&p, t, 4000).unwrap();
        let lat = lattice_determinant(p.omega(), t, 100_000).unwrap();
        assert!((gy.f_t - lat).abs() < 1e-6, "t={t}");
    }
}

#[test]
fn monte_carlo_chain_is_unbiased_over_seeds() {
    let p = ModelParams::new(0.3).unwrap();
    let (zf, zi) = (C::new(0.3, -0.2), C::new(-0.5, 0.4));
    let cfg = SliceConfig::new(2, 0.9, p).unwrap();
    let exact = bicoherent_propagator(&p, zf, zi, 0.9).value;
    let mut sum = C::new(0.0, 0.0);
    let mut var = 0.0;
    let seeds = 50;
    for seed in 0..seeds {
        let est = sliced_mc(&cfg, zf, zi, &McConfig::new(20_000, seed, 4).unwrap()).unwrap();
        sum += est.value;
        var += est.err_estimate * est.err_estimate;
    }
    let mean = sum / seeds as f64;
    let combined = var.sqrt() / seeds as f64;
    assert!((mean - exact).norm() < 3.0 * combined, "{mean} vs {exact} ± {combined}");
}
