//! Operators of the model as dense matrices in a truncated Fock basis
//! `|0>, ..., |D-1>`.
//!
//! Truncation corrupts the last rows and columns, so identities are only
//! asserted on an [`InteriorBlock`] of the lowest `K <= D/2` states.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<C>,
    label: String,
}

impl TruncatedOperator {
    pub fn new(entries: DMatrix<C>, label: impl Into<String>) -> Result<Self> {
        let dim = entries.nrows();
        if dim < 2 || entries.ncols() != dim {
            return Err(Error::Dimension { got: dim, min: 2 });
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::Singular("operator has non-finite entries".into()));
        }
        Ok(Self {
            entries,
            label: label.into(),
        })
    }

    // internal constructor for products of already validated operators
    fn wrap(entries: DMatrix<C>, label: String) -> Self {
        Self { entries, label }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim), "I")
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.entries.adjoint(), format!("{}^dag", self.label))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::wrap(
            &self.entries * &other.entries,
            format!("{} {}", self.label, other.label),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::wrap(
            &self.entries + &other.entries,
            format!("{} + {}", self.label, other.label),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::wrap(
            &self.entries - &other.entries,
            format!("{} - {}", self.label, other.label),
        )
    }

    pub fn scale(&self, c: C) -> Self {
        Self::wrap(&self.entries * c, format!("({c}) {}", self.label))
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Self::wrap(e, format!("[{}, {}]", self.label, other.label))
    }

    pub fn apply(&self, v: &DVector<C>) -> DVector<C> {
        &self.entries * v
    }

    /// Largest entry modulus of `self - other` restricted to the block.
    pub fn interior_deviation(&self, other: &Self, block: InteriorBlock) -> f64 {
        let k = block.keep;
        let mut worst: f64 = 0.0;
        for j in 0..k {
            for i in 0..k {
                worst = worst.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        worst
    }

    /// Largest entry modulus of `self - c I` restricted to the block.
    pub fn interior_deviation_from_scalar(&self, c: C, block: InteriorBlock) -> f64 {
        let k = block.keep;
        let mut worst: f64 = 0.0;
        for j in 0..k {
            for i in 0..k {
                let target = if i == j { c } else { ZERO };
                worst = worst.max((self.entries[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn interior(&self, block: InteriorBlock) -> DMatrix<C> {
        self.entries.view((0, 0), (block.keep, block.keep)).into_owned()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the full truncated matrix, sorted by real part.
    pub fn eigenvalues(&self) -> Result<Vec<C>> {
        eigenvalues(&self.entries)
    }

    /// `exp(c * self)`
    pub fn exp_scaled(&self, c: C, tol: f64) -> Result<Self> {
        let e = expm(&(&self.entries * c), tol)?;
        Ok(Self::wrap(e, format!("exp(({c}) {})", self.label)))
    }
}

/// Leading `keep x keep` block on which truncation effects are negligible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorBlock {
    keep: usize,
}

impl InteriorBlock {
    pub fn new(keep: usize, dim: usize) -> Result<Self> {
        if keep == 0 || 2 * keep > dim {
            return Err(Error::Validation(format!(
                "interior block {keep} must satisfy 1 <= K <= D/2 with D = {dim}"
            )));
        }
        Ok(Self { keep })
    }

    pub fn keep(&self) -> usize {
        self.keep
    }
}

pub fn ladder_ops(dim: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    if dim < 2 {
        return Err(Error::Dimension { got: dim, min: 2 });
    }
    let mut a = DMatrix::<C>::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    Ok((
        TruncatedOperator::wrap(a, "a".into()),
        TruncatedOperator::wrap(a_dag, "a^dag".into()),
    ))
}

/// `A = a cos θ + i a† sin θ`, `B = a† cos θ + i a sin θ`.
pub fn pseudo_boson_ops(
    params: &ModelParams,
    dim: usize,
) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (a, ad) = ladder_ops(dim)?;
    let (s, c) = params.theta().sin_cos();
    let is = C::new(0.0, s);
    let big_a = a.entries() * C::from(c) + ad.entries() * is;
    let big_b = ad.entries() * C::from(c) + a.entries() * is;
    Ok((
        TruncatedOperator::wrap(big_a, "A".into()),
        TruncatedOperator::wrap(big_b, "B".into()),
    ))
}

/// Generator `(iθ/2)(a² - a†²)` of the squeeze operator. Hermitian.
pub fn squeeze_generator(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let (a, ad) = ladder_ops(dim)?;
    let a2 = a.entries() * a.entries();
    let ad2 = ad.entries() * ad.entries();
    let g = (a2 - ad2) * C::new(0.0, 0.5 * params.theta());
    Ok(TruncatedOperator::wrap(g, "G".into()))
}

/// `T = exp((iθ/2)(a² - a†²))`.
pub fn squeeze_op(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let g = squeeze_generator(params, dim)?;
    let t = expm(g.entries(), params.tol_analytic())?;
    Ok(TruncatedOperator::wrap(t, "T".into()))
}

/// `T⁻¹ = exp(-(iθ/2)(a² - a†²))`, i.e. the squeeze operator at `-θ`.
pub fn squeeze_op_inverse(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let t = squeeze_op(&params.negated(), dim)?;
    Ok(TruncatedOperator::wrap(t.entries, "T^-1".into()))
}

/// `g = T⁻²`.
pub fn metric_op(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let t_inv = squeeze_op_inverse(params, dim)?;
    let g = t_inv.entries() * t_inv.entries();
    if g.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular(format!(
            "squeeze operator at theta = {} is not invertible at D = {dim}",
            params.theta()
        )));
    }
    Ok(TruncatedOperator::wrap(g, "g".into()))
}

/// `H = ω (B A + 1/2)`.
pub fn hamiltonian(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let (big_a, big_b) = pseudo_boson_ops(params, dim)?;
    let mut h = big_b.entries() * big_a.entries();
    for n in 0..dim {
        h[(n, n)] += C::from(0.5);
    }
    Ok(TruncatedOperator::wrap(h * C::from(params.omega()), "H".into()))
}

/// `h = ω (a† a + 1/2)`, the hermitian partner of `H`.
pub fn hermitian_partner(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    if dim < 2 {
        return Err(Error::Dimension { got: dim, min: 2 });
    }
    let w = params.omega();
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C::from(w * (i as f64 + 0.5))
        } else {
            ZERO
        }
    });
    Ok(TruncatedOperator::wrap(h, "h".into()))
}

/// `x = (a + a†)/√2`, `p = i(a† - a)/√2`.
pub fn position_momentum(dim: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (a, ad) = ladder_ops(dim)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = (a.entries() + ad.entries()) * C::from(r);
    let p = (ad.entries() - a.entries()) * C::new(0.0, r);
    Ok((
        TruncatedOperator::wrap(x, "x".into()),
        TruncatedOperator::wrap(p, "p".into()),
    ))
}

/// `H = [(e^{-iθ} p)² + (e^{iθ} x)²] / (2 cos 2θ)` built from truncated x and p.
pub fn hamiltonian_xp(params: &ModelParams, dim: usize) -> Result<TruncatedOperator> {
    let (big_x, big_p) = heisenberg_xp(params, dim, 0.0)?;
    let h = (big_p.entries() * big_p.entries() + big_x.entries() * big_x.entries())
        * C::from(0.5 * params.omega());
    Ok(TruncatedOperator::wrap(h, "H_xp".into()))
}

/// `X(t) = X cos ωt + P sin ωt`, `P(t) = P cos ωt - X sin ωt` with
/// `X = e^{iθ} x` and `P = e^{-iθ} p`.
pub fn heisenberg_xp(
    params: &ModelParams,
    dim: usize,
    t: f64,
) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (x, p) = position_momentum(dim)?;
    let x0 = x.entries() * params.rotation();
    let p0 = p.entries() * params.rotation().conj();
    let (s, c) = (params.omega() * t).sin_cos();
    let xt = &x0 * C::from(c) + &p0 * C::from(s);
    let pt = &p0 * C::from(c) - &x0 * C::from(s);
    Ok((
        TruncatedOperator::wrap(xt, format!("X({t})")),
        TruncatedOperator::wrap(pt, format!("P({t})")),
    ))
}

/// Eigenvalues of a hermitian block, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a general complex matrix via the Schur form, sorted by real part.
pub fn eigenvalues(m: &DMatrix<C>) -> Result<Vec<C>> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut ev = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        // a complex Schur form is triangular, but tolerate unreduced 2x2 blocks
        if i + 1 < n && t[(i + 1, i)].norm() > f64::EPSILON * (t[(i, i)].norm() + t[(i + 1, i + 1)].norm()) {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            ev.push(half_tr + disc);
            ev.push(half_tr - disc);
            i += 2;
        } else {
            ev.push(t[(i, i)]);
            i += 1;
        }
    }
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}

fn norm1(m: &DMatrix<C>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Taylor series with scaling and squaring.
///
/// The residual is the relative size of the last retained Taylor term of the
/// scaled series; it must fall below `tol`.
pub fn expm(m: &DMatrix<C>, tol: f64) -> Result<DMatrix<C>> {
    let n = m.nrows();
    let nrm = norm1(m);
    if !nrm.is_finite() {
        return Err(Error::Convergence {
            residual: f64::INFINITY,
            tol,
        });
    }
    let squarings = if nrm > 0.5 {
        (nrm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = m * C::from(0.5f64.powi(squarings));
    let mut sum = DMatrix::<C>::identity(n, n);
    let mut term = DMatrix::<C>::identity(n, n);
    let mut residual = f64::INFINITY;
    for k in 1..=60 {
        term = (&term * &x) * C::from(1.0 / k as f64);
        sum += &term;
        residual = norm1(&term) / norm1(&sum);
        if residual <= f64::EPSILON {
            break;
        }
    }
    if !(residual <= tol) {
        return Err(Error::Convergence { residual, tol });
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if sum.iter().any(|z| !z.is_finite()) {
        return Err(Error::Convergence {
            residual: f64::INFINITY,
            tol,
        });
    }
    Ok(sum)
}

/// `exp(c * m)` acting on a general matrix; convenience for time evolution.
pub fn evolution(h: &TruncatedOperator, t: f64, tol: f64) -> Result<TruncatedOperator> {
    h.exp_scaled(C::new(0.0, -t), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE: C = C::new(1.0, 0.0);

    fn params(theta: f64) -> ModelParams {
        ModelParams::new(theta).unwrap()
    }

    fn basis(dim: usize, n: usize) -> DVector<C> {
        let mut v = DVector::zeros(dim);
        v[n] = ONE;
        v
    }

    #[test]
    fn ladder_examples() {
        let (a, ad) = ladder_ops(8).unwrap();
        assert!(a.apply(&basis(8, 0)).iter().all(|z| *z == ZERO));
        assert_eq!(a.apply(&basis(8, 1)), basis(8, 0));
        assert_eq!(ad.entries(), &a.entries().adjoint());
        assert!(matches!(ladder_ops(1), Err(Error::Dimension { got: 1, min: 2 })));
    }

    #[test]
    fn canonical_commutator_only_fails_in_the_corner() {
        let d = 16;
        let (a, ad) = ladder_ops(d).unwrap();
        let c = a.commutator(&ad);
        let block = InteriorBlock::new(d / 2, d).unwrap();
        // only rounding of sqrt(n)^2 remains away from the corner
        assert!(c.interior_deviation_from_scalar(ONE, block) <= 4.0 * f64::EPSILON * d as f64);
        for i in 0..d {
            for j in 0..d {
                let want = if i != j {
                    0.0
                } else if i == d - 1 {
                    1.0 - d as f64
                } else {
                    1.0
                };
                assert!((c.entries()[(i, j)] - C::from(want)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn interior_block_bounds() {
        assert!(InteriorBlock::new(32, 64).is_ok());
        assert!(InteriorBlock::new(33, 64).is_err());
        assert!(InteriorBlock::new(0, 64).is_err());
    }

    #[test]
    fn pseudo_bosons_reduce_to_ladder_at_zero_theta() {
        let (a, _) = ladder_ops(12).unwrap();
        let (big_a, _) = pseudo_boson_ops(&params(0.0), 12).unwrap();
        assert_eq!(a.entries(), big_a.entries());
    }

    #[test]
    fn pseudo_boson_commutators() {
        let d = 64;
        let block = InteriorBlock::new(20, d).unwrap();
        for theta in [0.3, -0.6] {
            let (big_a, big_b) = pseudo_boson_ops(&params(theta), d).unwrap();
            let c2 = (2.0 * theta).cos();
            assert!(big_a.commutator(&big_b).interior_deviation_from_scalar(ONE, block) < 1e-12);
            assert!(
                big_a
                    .commutator(&big_a.adjoint())
                    .interior_deviation_from_scalar(C::from(c2), block)
                    < 1e-12
            );
            assert!(
                big_b
                    .commutator(&big_b.adjoint())
                    .interior_deviation_from_scalar(C::from(-c2), block)
                    < 1e-12
            );
        }
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![C::new(1.0, 2.0), C::new(-3.0, 0.5)]));
        let e = expm(&d, 1e-12).unwrap();
        assert!((e[(0, 0)] - C::new(1.0, 2.0).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - C::new(-3.0, 0.5).exp()).norm() < 1e-15);
        let mut n = DMatrix::<C>::zeros(3, 3);
        n[(0, 1)] = C::from(2.0);
        n[(1, 2)] = C::from(3.0);
        let e = expm(&n, 1e-12).unwrap();
        assert!((e[(0, 2)] - C::from(3.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - C::from(2.0)).norm() < 1e-13);
    }

    #[test]
    fn expm_rotation_against_closed_form() {
        // exp of 30 * [[0, -1], [1, 0]] exercises several squarings
        let mut m = DMatrix::<C>::zeros(2, 2);
        m[(0, 1)] = C::from(-30.0);
        m[(1, 0)] = C::from(30.0);
        let e = expm(&m, 1e-12).unwrap();
        assert!((e[(0, 0)] - C::from(30f64.cos())).norm() < 1e-12);
        assert!((e[(1, 0)] - C::from(30f64.sin())).norm() < 1e-12);
    }

    #[test]
    fn squeeze_examples() {
        let t0 = squeeze_op(&params(0.0), 16).unwrap();
        assert_eq!(t0.entries(), &DMatrix::<C>::identity(16, 16));
        let t = squeeze_op(&params(0.3), 64).unwrap();
        let herm = t.sub(&t.adjoint()).max_abs();
        assert!(herm < 1e-12 * t.max_abs().max(1.0), "{herm}");
        let block = InteriorBlock::new(20, 64).unwrap();
        let ev = hermitian_eigenvalues(&t.interior(block));
        assert!(ev[0] > 0.0);
    }

    #[test]
    fn squeeze_intertwines_ladder_and_pseudo_boson_at_large_dimension() {
        let p = params(0.3);
        let d = 128;
        let block = InteriorBlock::new(24, d).unwrap();
        let (a, _) = ladder_ops(d).unwrap();
        let t = squeeze_op(&p, d).unwrap();
        let t_inv = squeeze_op_inverse(&p, d).unwrap();
        let (big_a, _) = pseudo_boson_ops(&p, d).unwrap();
        let dev = t.mul(&a).mul(&t_inv).interior_deviation(&big_a, block);
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn metric_matches_direct_exponential() {
        let p = params(0.3);
        let d = 64;
        let block = InteriorBlock::new(20, d).unwrap();
        let g = metric_op(&p, d).unwrap();
        let (a, ad) = ladder_ops(d).unwrap();
        let gen = (ad.entries() * ad.entries() - a.entries() * a.entries()) * C::new(0.0, 0.3);
        let direct = TruncatedOperator::new(expm(&gen, 1e-12).unwrap(), "g").unwrap();
        assert!(g.interior_deviation(&direct, block) < 1e-8);
        assert!(hermitian_eigenvalues(&g.interior(block))[0] > 0.0);
        let g0 = metric_op(&params(0.0), 8).unwrap();
        assert_eq!(g0.entries(), &DMatrix::<C>::identity(8, 8));
    }

    #[test]
    fn hamiltonian_examples() {
        let h0 = hamiltonian(&params(0.0), 10).unwrap();
        for n in 0..10 {
            assert!((h0.entries()[(n, n)] - C::from(n as f64 + 0.5)).norm() < 1e-14);
        }
        let p = params(0.3);
        let ev = hamiltonian(&p, 64).unwrap().eigenvalues().unwrap();
        for (n, e) in ev.iter().take(8).enumerate() {
            assert!((e.re - p.omega() * (n as f64 + 0.5)).abs() < 1e-6);
            assert!(e.im.abs() < 1e-8);
        }
    }

    #[test]
    fn two_forms_of_the_hamiltonian_agree_on_the_interior() {
        let p = params(-0.35);
        let d = 48;
        let block = InteriorBlock::new(20, d).unwrap();
        let dev = hamiltonian(&p, d)
            .unwrap()
            .interior_deviation(&hamiltonian_xp(&p, d).unwrap(), block);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn heisenberg_operators() {
        let p = params(0.3);
        let d = 64;
        let block = InteriorBlock::new(20, d).unwrap();
        let (x0, p0) = heisenberg_xp(&p, d, 0.0).unwrap();
        let (x, mom) = position_momentum(d).unwrap();
        assert_eq!(x0.entries(), &(x.entries() * p.rotation()));
        assert_eq!(p0.entries(), &(mom.entries() * p.rotation().conj()));
        for t in [0.3, 1.1, 2.9] {
            let (xt, pt) = heisenberg_xp(&p, d, t).unwrap();
            let dev = xt.commutator(&pt).interior_deviation_from_scalar(C::i(), block);
            assert!(dev < 1e-10, "t = {t}: {dev}");
        }
    }

    #[test]
    fn heisenberg_closed_form_matches_conjugation() {
        let p = params(0.3);
        let d = 64;
        let t = 0.3;
        let block = InteriorBlock::new(20, d).unwrap();
        let h = hamiltonian(&p, d).unwrap();
        let fwd = evolution(&h, t, 1e-12).unwrap();
        let bwd = evolution(&h, -t, 1e-12).unwrap();
        let (x0, _) = heisenberg_xp(&p, d, 0.0).unwrap();
        let (xt, _) = heisenberg_xp(&p, d, t).unwrap();
        let dev = bwd.mul(&x0).mul(&fwd).interior_deviation(&xt, block);
        assert!(dev < 1e-6, "{dev}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pseudo_boson_commutator_is_identity(theta in -0.78f64..0.78) {
            let d = 24;
            let block = InteriorBlock::new(12, d).unwrap();
            let (big_a, big_b) = pseudo_boson_ops(&params(theta), d).unwrap();
            prop_assert!(big_a.commutator(&big_b).interior_deviation_from_scalar(ONE, block) < 1e-12);
        }

        #[test]
        fn squeeze_at_minus_theta_inverts(theta in -0.3f64..0.3) {
            let d = 48;
            let block = InteriorBlock::new(12, d).unwrap();
            let p = params(theta);
            let prod = squeeze_op(&p, d).unwrap().mul(&squeeze_op_inverse(&p, d).unwrap());
            prop_assert!(prod.interior_deviation_from_scalar(ONE, block) < 1e-10);
        }
    }
}
