//! Discretized phase-space action of a label trajectory `z(t)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub z: C,
    pub t: f64,
}

fn check(path: &[TrajectoryPoint]) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::Validation(format!(
            "trajectory needs at least two points, got {}",
            path.len()
        )));
    }
    Ok(())
}

/// `S = Σ_l [ (i/2)(z_{l-1}* Δz_l - Δz_l* z_{l-1}) - ω(|z_l|² + 1/2) Δt_l ]`.
///
/// Both differences share the left point, which makes every kinetic term
/// `-Im(z_{l-1}* z_l)` real.
pub fn action_z(params: &ModelParams, path: &[TrajectoryPoint]) -> Result<f64> {
    check(path)?;
    let w = params.omega();
    let mut s = 0.0;
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        s -= (a.z.conj() * b.z).im;
        s -= w * (b.z.norm_sqr() + 0.5) * (b.t - a.t);
    }
    Ok(s)
}

/// The same sum with the ordering `z_l*(z_l - z_{l-1}) - (z_l - z_{l-1})* z_{l-1}`.
/// Its kinetic part is not real for generic paths.
pub fn action_z_complex(params: &ModelParams, path: &[TrajectoryPoint]) -> Result<C> {
    check(path)?;
    let w = params.omega();
    let mut s = C::new(0.0, 0.0);
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dz = b.z - a.z;
        s += C::new(0.0, 0.5) * (b.z.conj() * dz - dz.conj() * a.z);
        s -= w * (b.z.norm_sqr() + 0.5) * (b.t - a.t);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::classical_z;
    use proptest::prelude::*;

    fn classical_path(p: &ModelParams, zi: C, t: f64, n: usize) -> Vec<TrajectoryPoint> {
        (0..=n)
            .map(|k| {
                let tk = t * k as f64 / n as f64;
                TrajectoryPoint {
                    z: classical_z(zi, p, tk),
                    t: tk,
                }
            })
            .collect()
    }

    #[test]
    fn constant_path() {
        let p = ModelParams::new(0.3).unwrap();
        let c = C::new(0.4, -1.2);
        let path: Vec<_> = (0..=10)
            .map(|k| TrajectoryPoint { z: c, t: 0.2 * k as f64 })
            .collect();
        let want = -p.omega() * (c.norm_sqr() + 0.5) * 2.0;
        assert!((action_z(&p, &path).unwrap() - want).abs() < 1e-13);
        assert!(action_z(&p, &path[..1]).is_err());
    }

    #[test]
    fn classical_path_converges_and_is_stationary() {
        let p = ModelParams::new(0.3).unwrap();
        let zi = C::new(0.8, -0.3);
        let t = 1.3;
        // continuum value: kinetic ω|z|² t cancels the |z|² part of H
        let continuum = -0.5 * p.omega() * t;
        let mut last_err = f64::INFINITY;
        let mut last_grad = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let path = classical_path(&p, zi, t, n);
            let err = (action_z(&p, &path).unwrap() - continuum).abs();
            assert!(err < last_err);
            last_err = err;

            let h = 1e-6;
            let k = n / 2;
            let mut grad: f64 = 0.0;
            for dir in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
                let mut plus = path.clone();
                let mut minus = path.clone();
                plus[k].z += dir * h;
                minus[k].z -= dir * h;
                let g = (action_z(&p, &plus).unwrap() - action_z(&p, &minus).unwrap()) / (2.0 * h);
                grad = grad.max(g.abs());
            }
            assert!(grad < last_grad);
            last_grad = grad;
        }
        assert!(last_err < 1e-3);
        assert!(last_grad < 1e-3);
    }

    #[test]
    fn other_ordering_is_not_real() {
        let p = ModelParams::new(0.3).unwrap();
        let path = vec![
            TrajectoryPoint { z: C::new(0.3, 0.1), t: 0.0 },
            TrajectoryPoint { z: C::new(-0.2, 0.9), t: 0.5 },
        ];
        assert!(action_z_complex(&p, &path).unwrap().im.abs() > 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn action_is_real_and_matches_complex_form_in_real_part(
            theta in -0.7f64..0.7,
            coords in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..20),
        ) {
            let p = ModelParams::new(theta).unwrap();
            let path: Vec<_> = coords
                .iter()
                .enumerate()
                .map(|(k, (a, b))| TrajectoryPoint { z: C::new(*a, *b), t: 0.1 * k as f64 })
                .collect();
            let s = action_z(&p, &path).unwrap();
            prop_assert!(s.is_finite());
            let c = action_z_complex(&p, &path).unwrap();
            prop_assert!((c.re - s).abs() < 1e-12);
        }
    }
}
