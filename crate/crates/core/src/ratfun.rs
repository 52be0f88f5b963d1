//! Normalized rational functions.
//!
//! A [`RatFun`] keeps its denominator in factored form: a list of distinct
//! poles with multiplicities, next to the expanded monic polynomial. Field
//! operations combine pole lists directly (union for sums, merged sums of
//! multiplicities for products) and then cancel the numerator against the
//! known pole locations. Root finding is only needed when a numerator moves
//! into a denominator (reciprocals) or when normalizing raw input.
//!
//! All root matching happens in [`RatFun`] construction; code downstream of a
//! normalized value reads multiplicities off it and never re-matches roots.

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::cpoly::{PointMult, Poly, DEFAULT_CLUSTER_TOL};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients of a sum below this fraction of the summands are round-off.
pub const CANCEL_REL_TOL: f64 = 1e-13;

/// A value in the extended plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Finite(Complex64),
    Infinity,
}

impl Target {
    pub fn finite(re: f64, im: f64) -> Self {
        Target::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Target::Infinity)
    }

    /// Equality within the cluster criterion.
    pub fn same_as(&self, other: &Target, tol: f64) -> bool {
        match (self, other) {
            (Target::Infinity, Target::Infinity) => true,
            (Target::Finite(a), Target::Finite(b)) => PointMult::same_point(*a, *b, tol),
            _ => false,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Infinity => f.write_str("inf"),
            Target::Finite(c) => f.write_str(&crate::parse::format_complex(*c, 12)),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Result of evaluating a rational function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(Complex64),
    Pole,
}

impl Value {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Value::Finite(v) => Some(v),
            Value::Pole => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Value::Pole)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Finite(v) => v.serialize(s),
            Value::Pole => s.serialize_str("pole"),
        }
    }
}

/// `num / den` with `den` monic, coprime to `num` within the cluster
/// tolerance, and stored alongside its distinct poles.
#[derive(Clone)]
pub struct RatFun {
    num: Poly,
    den: Poly,
    poles: Vec<PointMult>,
    tol: f64,
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RatFun")
            .field("num", &self.num)
            .field("poles", &self.poles)
            .finish()
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parse::format_expr(self, 12))
    }
}

/// Pairing of two pole lists: (location, multiplicity in a, multiplicity in b).
fn pair_poles(a: &[PointMult], b: &[PointMult], tol: f64) -> Vec<(Complex64, usize, usize)> {
    let mut used = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len() + b.len());
    for pa in a {
        let hit = b
            .iter()
            .enumerate()
            .find(|(j, pb)| !used[*j] && PointMult::same_point(pa.location, pb.location, tol));
        match hit {
            Some((j, pb)) => {
                used[j] = true;
                out.push((pa.location, pa.mult, pb.mult));
            }
            None => out.push((pa.location, pa.mult, 0)),
        }
    }
    for (j, pb) in b.iter().enumerate() {
        if !used[j] {
            out.push((pb.location, 0, pb.mult));
        }
    }
    out
}

/// Leading Taylor coefficients of `a + b` at `z` that cancel to within `rel`
/// of the summands, up to `max`.
fn cancel_order(a: &Poly, b: &Poly, z: Complex64, max: usize, rel: f64) -> usize {
    let (mut a, mut b) = (a.clone(), b.clone());
    for k in 0..max {
        let (qa, ra) = a.deflate(z);
        let (qb, rb) = b.deflate(z);
        if (ra + rb).norm() > rel * (ra.norm() + rb.norm()) {
            return k;
        }
        a = qa;
        b = qb;
    }
    max
}

fn points(list: impl IntoIterator<Item = (Complex64, usize)>) -> Vec<PointMult> {
    list.into_iter()
        .filter(|(_, m)| *m > 0)
        .map(|(z, m)| PointMult::new(z, m))
        .collect()
}

impl RatFun {
    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    /// The identity function `z`.
    pub fn z() -> Self {
        Self::from_poly(Poly::z())
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::one(),
            poles: Vec::new(),
            tol: DEFAULT_CLUSTER_TOL,
        }
    }

    /// Normalizes `num / den`: factors `den`, cancels common roots up to
    /// their minimum multiplicity and scales `den` to be monic.
    pub fn normalize(num: Poly, den: Poly, tol: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::arg("rational function with zero denominator"));
        }
        let lead = den.leading();
        let num = num.scale(lead.inv());
        if den.is_constant() {
            return Ok(Self::from_poly(num).with_tol(tol));
        }
        let poles = den.roots(tol)?;
        Ok(Self::from_parts(num, poles, tol))
    }

    /// Builds from a numerator and distinct poles, cancelling the numerator
    /// against each pole.
    pub(crate) fn from_parts(mut num: Poly, poles: Vec<PointMult>, tol: f64) -> Self {
        if num.is_zero() {
            return Self::zero().with_tol(tol);
        }
        let mut kept = Vec::with_capacity(poles.len());
        for pm in poles {
            let k = if num.is_constant() {
                0
            } else {
                num.order_at_unchecked(pm.location, tol).min(pm.mult)
            };
            for _ in 0..k {
                num = num.deflate_root(pm.location);
            }
            if pm.mult > k {
                kept.push(PointMult::new(pm.location, pm.mult - k));
            }
        }
        Self::from_kept(num, kept, tol)
    }

    /// Builds from a numerator and poles already in lowest terms.
    pub(crate) fn from_kept(num: Poly, poles: Vec<PointMult>, tol: f64) -> Self {
        if num.is_zero() {
            return Self::zero().with_tol(tol);
        }
        Self {
            num,
            den: Poly::from_roots(&poles),
            poles,
            tol,
        }
    }

    /// Same function with a different cluster tolerance for later operations.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Distinct poles with multiplicities.
    pub fn poles(&self) -> &[PointMult] {
        &self.poles
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.poles.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    /// Constant value if this is a constant function.
    pub fn as_constant(&self) -> Option<Complex64> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    /// `max(deg num, deg den)`; zero for constants.
    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    fn pair_tol(&self, other: &RatFun) -> f64 {
        self.tol.max(other.tol)
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        let tol = self.pair_tol(other);
        let pairs = pair_poles(&self.poles, &other.poles, tol);
        let cof_a = Poly::from_roots(&points(pairs.iter().map(|&(z, a, b)| (z, a.max(b) - a))));
        let cof_b = Poly::from_roots(&points(pairs.iter().map(|&(z, a, b)| (z, a.max(b) - b))));
        let sa = &self.num * &cof_a;
        let sb = &other.num * &cof_b;
        let mut sum = sa.add_trimmed(&sb, CANCEL_REL_TOL);
        if sum.is_zero() {
            return Self::zero().with_tol(tol);
        }
        // A pole of only one summand, or of unequal order in the two, survives.
        // At a pole of equal order the principal parts can cancel; compare them
        // term by term against the two summands.
        let mut kept = Vec::with_capacity(pairs.len());
        for &(z, a, b) in &pairs {
            let k = if a == b { cancel_order(&sa, &sb, z, a, tol) } else { 0 };
            for _ in 0..k {
                sum = sum.deflate_root(z);
            }
            if a.max(b) > k {
                kept.push(PointMult::new(z, a.max(b) - k));
            }
        }
        Self::from_kept(sum, kept, tol)
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: -&self.num,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: Complex64) -> RatFun {
        if s == ZERO {
            return Self::zero().with_tol(self.tol);
        }
        RatFun {
            num: self.num.scale(s),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        let tol = self.pair_tol(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero().with_tol(tol);
        }
        let pairs = pair_poles(&self.poles, &other.poles, tol);
        let num = &self.num * &other.num;
        Self::from_parts(num, points(pairs.iter().map(|&(z, a, b)| (z, a + b))), tol)
    }

    /// `1 / g`; finds the roots of the numerator.
    pub fn recip(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::arg("reciprocal of the zero function"));
        }
        let lead = self.num.leading();
        let num = self.den.scale(lead.inv());
        if self.num.is_constant() {
            return Ok(Self::from_poly(num).with_tol(self.tol));
        }
        let poles = self.num.roots(self.tol)?;
        Ok(RatFun {
            den: Poly::from_roots(&poles),
            num,
            poles,
            tol: self.tol,
        })
    }

    pub fn div(&self, other: &RatFun) -> Result<RatFun> {
        if other.is_zero() {
            return Err(Error::arg("division by the zero function"));
        }
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn powi(&self, n: i32) -> Result<RatFun> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = RatFun::one().with_tol(self.tol);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// `g(αz + β)`. Poles move to `(p - β)/α`; no root finding is needed.
    pub fn compose_affine(&self, alpha: Complex64, beta: Complex64) -> Result<RatFun> {
        if alpha == ZERO {
            return Err(Error::arg("affine substitution with α = 0"));
        }
        let deg_den = self.den.degree().unwrap_or(0) as i32;
        let num = self
            .num
            .compose_affine(alpha, beta)
            .scale(alpha.powi(-deg_den));
        let poles: Vec<PointMult> = self
            .poles
            .iter()
            .map(|p| PointMult::new((p.location - beta) / alpha, p.mult))
            .collect();
        Ok(RatFun {
            num,
            den: Poly::from_roots(&poles),
            poles,
            tol: self.tol,
        })
    }

    /// `num(z)/den(z)`, or [`Value::Pole`] when the denominator is at its
    /// rounding floor at `z`.
    pub fn eval(&self, z: Complex64) -> Value {
        let d = self.den.eval(z);
        let floor = 16.0 * f64::EPSILON * self.den.eval_scale(z);
        if d.norm() <= floor {
            return Value::Pole;
        }
        let v = self.num.eval(z) / d;
        if v.is_finite() {
            Value::Finite(v)
        } else {
            Value::Pole
        }
    }

    /// Numerator of `g - a` over the same denominator.
    pub(crate) fn shifted_num(&self, a: Complex64) -> Poly {
        self.num.add_trimmed(&self.den.scale(-a), CANCEL_REL_TOL)
    }

    /// Solutions of `g = a` with multiplicities; the poles when `a = ∞`.
    pub fn a_points(&self, a: Target) -> Result<Vec<PointMult>> {
        match a {
            Target::Infinity => Ok(self.poles.clone()),
            Target::Finite(a) => {
                let p = self.shifted_num(a);
                if p.is_zero() {
                    return Err(Error::degenerate(format!("g is identically {a}")));
                }
                if p.is_constant() {
                    return Ok(Vec::new());
                }
                p.roots(self.tol)
            }
        }
    }

    /// Net order at `z`: zero order if positive, minus the pole order if
    /// negative. The zero function returns `i64::MAX`.
    pub fn order_at(&self, z: Complex64) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        let pole = self
            .poles
            .iter()
            .find(|p| PointMult::same_point(p.location, z, self.tol))
            .map_or(0, |p| p.mult as i64);
        if pole > 0 {
            return -pole;
        }
        self.num.order_at_unchecked(z, self.tol) as i64
    }

    /// Equality as functions: `‖a.num b.den - b.num a.den‖` relative to the
    /// two cross products.
    pub fn approx_eq(&self, other: &RatFun, rel: f64) -> bool {
        let left = &self.num * &other.den;
        let right = &other.num * &self.den;
        let scale = left.norm().max(right.norm());
        if scale == 0.0 {
            return true;
        }
        (&left - &right).norm() <= rel * scale
    }

    /// Relative coefficient discrepancy used by [`RatFun::approx_eq`].
    pub fn discrepancy(&self, other: &RatFun) -> f64 {
        let left = &self.num * &other.den;
        let right = &other.num * &self.den;
        let scale = left.norm().max(right.norm());
        if scale == 0.0 {
            0.0
        } else {
            (&left - &right).norm() / scale
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rf(num: &[f64], den: &[f64]) -> RatFun {
        RatFun::normalize(Poly::from_real(num), Poly::from_real(den), DEFAULT_CLUSTER_TOL)
            .unwrap()
    }

    fn close(a: &Poly, b: &Poly, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn normalize_examples() {
        let g = rf(&[-1.0, 0.0, 1.0], &[-1.0, 1.0]);
        assert!(close(g.num(), &Poly::from_real(&[1.0, 1.0]), 1e-12));
        assert_eq!(g.den(), &Poly::one());

        let g = rf(&[0.0, 1.0], &[2.0]);
        assert_eq!(g.num(), &Poly::from_real(&[0.0, 0.5]));
        assert_eq!(g.den(), &Poly::one());

        // (z-1)^2 (z+3) / ((z-1)(z+2))
        let num = Poly::from_roots(&[PointMult::new(c(1.0), 2), PointMult::new(c(-3.0), 1)]);
        let den = Poly::from_roots(&[PointMult::new(c(1.0), 1), PointMult::new(c(-2.0), 1)]);
        let g = RatFun::normalize(num, den, DEFAULT_CLUSTER_TOL).unwrap();
        let want_num = Poly::from_roots(&[PointMult::new(c(1.0), 1), PointMult::new(c(-3.0), 1)]);
        assert!(close(g.num(), &want_num, 1e-12), "{g:?}");
        assert!(close(g.den(), &Poly::from_real(&[2.0, 1.0]), 1e-12));

        assert!(RatFun::normalize(Poly::one(), Poly::zero(), 1e-7).is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        let g = rf(&[1.0, 2.0, 0.0, 1.0], &[3.0, 0.0, 1.0]);
        let h = RatFun::normalize(g.num().clone(), g.den().clone(), g.tol()).unwrap();
        assert!(close(h.num(), g.num(), 1e-13));
        assert!(close(h.den(), g.den(), 1e-13));
    }

    #[test]
    fn arith_examples() {
        let z = RatFun::z();
        let s = z.add(&z.recip().unwrap());
        assert!(s.approx_eq(&rf(&[1.0, 0.0, 1.0], &[0.0, 1.0]), 1e-14));

        let p = rf(&[1.0], &[-1.0, 1.0]).mul(&rf(&[-1.0, 1.0], &[1.0]));
        assert_eq!(p.as_constant().map(|v| (v - c(1.0)).norm() < 1e-14), Some(true));

        let cube = rf(&[1.0, 1.0], &[1.0]).powi(3).unwrap();
        assert!(close(cube.num(), &Poly::from_real(&[1.0, 3.0, 3.0, 1.0]), 1e-14));

        assert!(z.div(&RatFun::zero()).is_err());
        let inv = z.powi(-2).unwrap();
        assert_eq!(inv.poles(), &[PointMult::new(ZERO, 2)]);
    }

    #[test]
    fn eval_examples() {
        let g = rf(&[1.0], &[-1.0, 1.0]);
        assert!(g.eval(c(1.0)).is_pole());
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        assert_eq!(z2.eval(c(2.0)), Value::Finite(c(4.0)));
        let removable = rf(&[-1.0, 0.0, 1.0], &[-1.0, 1.0]);
        let v = removable.eval(c(1.0)).finite().unwrap();
        assert!((v - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn compose_examples() {
        let g = rf(&[1.0, 2.0], &[3.0, 1.0, 1.0]);
        let id = g.compose_affine(ONE, ZERO).unwrap();
        assert!(id.approx_eq(&g, 1e-15));
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        let v = z2.compose_affine(c(0.5), c(1.0)).unwrap();
        assert!(close(v.num(), &Poly::from_real(&[1.0, 1.0, 0.25]), 1e-15));
        let inv = rf(&[1.0], &[0.0, 1.0]).compose_affine(c(0.5), c(1.0)).unwrap();
        assert!(inv.approx_eq(&rf(&[1.0], &[1.0, 0.5]), 1e-15));
        assert!(g.compose_affine(ZERO, ONE).is_err());
    }

    #[test]
    fn a_point_examples() {
        let g = rf(&[1.0, 0.0, 1.0], &[0.0, 1.0]);
        let pts = g.a_points(Target::finite(2.0, 0.0)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].mult, 2);
        assert!((pts[0].location - c(1.0)).norm() < 1e-7);
        assert_eq!(g.a_points(Target::Infinity).unwrap(), vec![PointMult::new(ZERO, 1)]);
        let z2 = rf(&[0.0, 0.0, 1.0], &[1.0]);
        assert_eq!(z2.a_points(Target::finite(0.0, 0.0)).unwrap(), vec![PointMult::new(ZERO, 2)]);
        let k = RatFun::constant(c(3.0));
        assert!(matches!(k.a_points(Target::finite(3.0, 0.0)), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn order_examples() {
        assert_eq!(rf(&[0.0, 0.0, 1.0], &[1.0]).order_at(ZERO), 2);
        let p = Poly::from_roots(&[PointMult::new(c(1.0), 3)]);
        let g = RatFun::normalize(Poly::one(), p, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(g.order_at(c(1.0)), -3);
        let g = RatFun::normalize(
            Poly::from_real(&[-1.0, 1.0]),
            Poly::from_roots(&[PointMult::new(c(1.0), 2)]),
            DEFAULT_CLUSTER_TOL,
        )
        .unwrap();
        assert_eq!(g.order_at(c(1.0)), -1);
        assert_eq!(g.order_at(c(5.0)), 0);
    }

    #[test]
    fn target_labels() {
        assert_eq!(Target::Infinity.to_string(), "inf");
        assert_eq!(Target::finite(-2.0, 0.0).to_string(), "-2");
    }
}
