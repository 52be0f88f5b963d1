//! The Hahn difference operator on rational functions.
//!
//! `D_{q,c} g(z) = (g(qz + c) - g(z)) / ((q - 1) z + c)`.
//!
//! The difference `g(σz) - g(z)` vanishes at the fixed point `z0` whenever
//! `g` is finite there, and normalization cancels that factor against the
//! `(q - 1)(z - z0)` denominator, so `D g` has no spurious pole at `z0`.

use num_complex::Complex64;

use crate::cpoly::{PointMult, Poly};
use crate::error::{Error, Result};
use crate::qcore::{gauss_binomial, sigma_k_affine, HahnParams};
use crate::ratfun::RatFun;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `s / ((q - 1) z + c)^k` as a rational function with its pole at `z0`.
fn over_denominator_power(p: &HahnParams, k: usize, s: Complex64, tol: f64) -> RatFun {
    let lead = (p.q() - ONE).powi(k as i32);
    RatFun::from_parts(
        Poly::constant(s / lead),
        vec![PointMult::new(p.z0(), k)],
        tol,
    )
}

pub fn hahn_diff(g: &RatFun, p: &HahnParams) -> RatFun {
    if g.is_constant() {
        return RatFun::zero().with_tol(g.tol());
    }
    let shifted = g
        .compose_affine(p.q(), p.c())
        .expect("q != 0 is a HahnParams invariant");
    divide_at_fixed_point(g, &shifted.sub(g), p, 1, ONE)
}

/// `s · diff / ((q - 1) z + c)^k` where `diff` is a k-th difference of `g`.
///
/// When `g` is finite at `z0` the difference vanishes there to order `k` and
/// the factor is deflated exactly instead of through a numerical order test.
fn divide_at_fixed_point(g: &RatFun, diff: &RatFun, p: &HahnParams, k: usize, s: Complex64) -> RatFun {
    let z0 = p.z0();
    let finite_at_z0 = g.poles().iter().all(|pm| (pm.location - z0).norm() > g.tol());
    if !finite_at_z0 || diff.is_zero() {
        return diff.mul(&over_denominator_power(p, k, s, g.tol()));
    }
    let mut num = diff.num().clone();
    for _ in 0..k {
        num = num.deflate_root(z0);
    }
    let lead = (p.q() - ONE).powi(k as i32);
    RatFun::from_kept(num.scale(s / lead), diff.poles().to_vec(), g.tol())
}

/// `D^k g` by k-fold application of [`hahn_diff`].
pub fn hahn_iter(g: &RatFun, k: usize, p: &HahnParams) -> Result<RatFun> {
    if k == 0 {
        return Err(Error::arg("iterate order k must be at least 1"));
    }
    let mut out = hahn_diff(g, p);
    for _ in 1..k {
        out = hahn_diff(&out, p);
    }
    Ok(out)
}

/// `D^k g` from the closed form
///
/// ```text
/// D^k g(z) = Σ_{i=0}^{k} (-1)^i [k i]_q q^{i(i-1)/2} g(σ^{k-i} z)
///            / ( q^{k(k-1)/2} ((q - 1) z + c)^k )
/// ```
///
/// The `q^{k(k-1)/2}` factor comes from `(q-1)σ(z) + c = q((q-1)z + c)`:
/// each level of the recursion rescales the denominator by one more power of
/// `q`. Dropping it gives a function that differs from the recursion by that
/// constant factor; see the `expansion_needs_q_power` test.
pub fn hahn_expand(g: &RatFun, k: usize, p: &HahnParams) -> Result<RatFun> {
    if k == 0 {
        return Err(Error::arg("iterate order k must be at least 1"));
    }
    let q = p.q();
    let mut sum = RatFun::zero().with_tol(g.tol());
    for i in 0..=k {
        let weight = gauss_binomial(k as u32, i as i64, q)?
            * q.powi((i * i.saturating_sub(1) / 2) as i32)
            * if i % 2 == 0 { 1.0 } else { -1.0 };
        let (alpha, beta) = sigma_k_affine((k - i) as u32, p);
        let term = g.compose_affine(alpha, beta)?.scale(weight);
        sum = sum.add(&term);
    }
    let norm = q.powi((k * (k - 1) / 2) as i32).inv();
    Ok(divide_at_fixed_point(g, &sum, p, k, norm))
}

/// `D(1/g)` through `-D g / (g(σz) g(z))`.
pub fn hahn_reciprocal(g: &RatFun, p: &HahnParams) -> Result<RatFun> {
    if g.is_zero() {
        return Err(Error::arg("D(1/g) for g identically zero"));
    }
    let inv = g.recip()?;
    let inv_shifted = inv.compose_affine(p.q(), p.c())?;
    Ok(hahn_diff(g, p).neg().mul(&inv_shifted).mul(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpoly::DEFAULT_CLUSTER_TOL;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rf(num: &[f64], den: &[f64]) -> RatFun {
        RatFun::normalize(Poly::from_real(num), Poly::from_real(den), DEFAULT_CLUSTER_TOL)
            .unwrap()
    }

    fn poly_close(a: &Poly, b: &Poly, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn diff_examples() {
        let p = HahnParams::new(Complex64::new(0.3, 0.7), Complex64::new(-1.0, 2.0)).unwrap();
        assert!(hahn_diff(&RatFun::constant(c(4.0)), &p).is_zero());

        let dz = hahn_diff(&RatFun::z(), &p);
        assert!(dz.is_polynomial());
        assert!(poly_close(dz.num(), &Poly::one(), 1e-14), "{dz:?}");

        let p = HahnParams::real(0.5, 1.0).unwrap();
        let d = hahn_diff(&rf(&[0.0, 0.0, 1.0], &[1.0]), &p);
        assert!(d.is_polynomial());
        assert!(poly_close(d.num(), &Poly::from_real(&[1.0, 1.5]), 1e-14), "{d:?}");
    }

    #[test]
    fn iter_examples() {
        let p = HahnParams::real(0.5, 1.0).unwrap();
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        let d2 = hahn_iter(&z2, 2, &p).unwrap();
        assert!((d2.as_constant().unwrap() - c(1.5)).norm() < 1e-14);
        let z3 = rf(&[0.0, 0.0, 0.0, 1.0], &[1.0]);
        assert!(hahn_iter(&z3, 1, &p).unwrap().approx_eq(&hahn_diff(&z3, &p), 0.0));
        assert!(hahn_iter(&RatFun::constant(c(2.0)), 3, &p).unwrap().is_zero());
        assert!(hahn_iter(&z2, 0, &p).is_err());
    }

    #[test]
    fn expand_examples() {
        let p = HahnParams::real(0.5, 1.0).unwrap();
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        let e = hahn_expand(&z2, 2, &p).unwrap();
        assert!((e.as_constant().unwrap() - c(1.5)).norm() < 1e-13, "{e:?}");
        let e1 = hahn_expand(&RatFun::z(), 1, &p).unwrap();
        assert!((e1.as_constant().unwrap() - c(1.0)).norm() < 1e-14);
        let inv = rf(&[1.0], &[0.0, 1.0]);
        let a = hahn_expand(&inv, 2, &p).unwrap();
        let b = hahn_iter(&inv, 2, &p).unwrap();
        assert!(a.approx_eq(&b, 1e-10), "{a:?} vs {b:?}");
        assert_eq!(a.poles().len(), b.poles().len());
    }

    /// Hand-expanded recursion for k = 2 at a point:
    /// `D²g = [g(σ²z) - (1+q) g(σz) + q g(z)] / (q ((q-1)z + c)²)`.
    /// The same numerator over `((q-1)z + c)²` alone is off by `q`.
    #[test]
    fn expansion_needs_q_power() {
        let p = HahnParams::new(Complex64::new(0.6, -0.2), Complex64::new(0.4, 0.9)).unwrap();
        let q = p.q();
        let g = rf(&[1.0, -2.0, 0.0, 1.0], &[2.0, 1.0, 1.0]);
        let ev = |z: Complex64| g.eval(z).finite().unwrap();
        for z in [Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.8)] {
            let s1 = p.sigma(z);
            let s2 = p.sigma(s1);
            let numer = ev(s2) - (ONE + q) * ev(s1) + q * ev(z);
            let ell = p.denominator(z);
            let by_recursion = numer / (q * ell * ell);
            let as_printed = numer / (ell * ell);
            let d2 = hahn_iter(&g, 2, &p).unwrap().eval(z).finite().unwrap();
            let e2 = hahn_expand(&g, 2, &p).unwrap().eval(z).finite().unwrap();
            assert!((d2 - by_recursion).norm() < 1e-10 * by_recursion.norm());
            assert!((e2 - by_recursion).norm() < 1e-10 * by_recursion.norm());
            assert!((as_printed - by_recursion).norm() > 0.1 * by_recursion.norm());
        }
    }

    /// k = 3 by pointwise nested differences against the closed form.
    #[test]
    fn expansion_k3_pointwise() {
        let p = HahnParams::new(Complex64::new(0.45, 0.3), Complex64::new(-0.7, 0.2)).unwrap();
        let g = rf(&[0.5, 1.0, -1.0], &[-3.0, 0.0, 1.0]);
        let d = |f: &dyn Fn(Complex64) -> Complex64, z: Complex64| {
            (f(p.sigma(z)) - f(z)) / p.denominator(z)
        };
        let g0 = |z: Complex64| g.eval(z).finite().unwrap();
        let g1 = |z: Complex64| d(&g0, z);
        let g2 = |z: Complex64| d(&g1, z);
        let g3 = |z: Complex64| d(&g2, z);
        let e3 = hahn_expand(&g, 3, &p).unwrap();
        for z in [Complex64::new(0.2, 0.5), Complex64::new(1.1, -0.4)] {
            let want = g3(z);
            let got = e3.eval(z).finite().unwrap();
            assert!((got - want).norm() < 1e-9 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn reciprocal_examples() {
        let p = HahnParams::real(0.5, 1.0).unwrap();
        let r = hahn_reciprocal(&RatFun::z(), &p).unwrap();
        // -1 / (z (0.5 z + 1)) = -2 / (z (z + 2))
        let want = rf(&[-2.0], &[0.0, 2.0, 1.0]);
        assert!(r.approx_eq(&want, 1e-13), "{r:?}");
        assert!(hahn_reciprocal(&RatFun::constant(c(3.0)), &p).unwrap().is_zero());
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        let a = hahn_reciprocal(&z2, &p).unwrap();
        let b = hahn_diff(&z2.recip().unwrap(), &p);
        assert!(a.approx_eq(&b, 1e-10));
        assert!(hahn_reciprocal(&RatFun::zero(), &p).is_err());
    }

    #[test]
    fn no_pole_at_fixed_point() {
        let p = HahnParams::real(0.5, 1.0).unwrap();
        let g = rf(&[1.0, 0.0, 3.0], &[5.0, 1.0]);
        let d = hahn_diff(&g, &p);
        assert!(d.order_at(p.z0()) >= 0);
        assert!(d.poles().iter().all(|q| (q.location - p.z0()).norm() > 1e-6));
    }

    #[test]
    fn pole_at_fixed_point_survives() {
        // g = 1/(z - 2) with z0 = 2: D g keeps a pole at z0.
        let p = HahnParams::real(0.5, 1.0).unwrap();
        let g = rf(&[1.0], &[-2.0, 1.0]);
        let d = hahn_diff(&g, &p);
        assert!(d.order_at(p.z0()) < 0);
        let z = Complex64::new(0.7, 0.3);
        let want = (g.eval(p.sigma(z)).finite().unwrap() - g.eval(z).finite().unwrap())
            / p.denominator(z);
        assert!((d.eval(z).finite().unwrap() - want).norm() < 1e-12);
    }
}
