//! Dense complex polynomials.
//!
//! Coefficients are stored in ascending degree with no trailing (highest
//! index) zeros, so the zero polynomial is the empty coefficient vector and
//! has degree `None`.
//!
//! Root finding runs Aberth–Ehrlich simultaneous iteration and then groups
//! the approximations into clusters, one per distinct root. The cluster
//! tolerance ([`DEFAULT_CLUSTER_TOL`]) is the single knob that decides when
//! nearby numerical roots are the same point, and every downstream counting
//! function inherits that decision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute floor, relative to `‖a‖`, of the order test in [`Poly::order_at`].
const ORDER_NOISE_FLOOR: f64 = 1e-12;

/// Default relative radius for merging roots into one multiple root.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// Iteration cap of the simultaneous root solver.
pub const ROOT_ITERATION_CAP: usize = 500;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A point with a multiplicity, used for zero and pole data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointMult {
    pub location: Complex64,
    pub mult: usize,
}

impl PointMult {
    pub fn new(location: Complex64, mult: usize) -> Self {
        assert!(mult >= 1, "multiplicity must be positive");
        Self { location, mult }
    }

    /// `|a - b| <= tol (1 + max(|a|, |b|))`, the clustering criterion.
    pub fn same_point(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }
}

#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly").field(&self.coeffs).finish()
    }
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, stripping exact
    /// trailing zeros.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Self::new(vec![ZERO, ONE])
    }

    /// `z - r`.
    pub fn linear_factor(r: Complex64) -> Self {
        Self::new(vec![-r, ONE])
    }

    /// Monic product `∏ (z - p)^m`.
    pub fn from_roots(roots: &[PointMult]) -> Self {
        let mut out = vec![ONE];
        for pm in roots {
            for _ in 0..pm.mult {
                out.push(ZERO);
                for i in (1..out.len()).rev() {
                    out[i] = out[i - 1] - pm.location * out[i];
                }
                out[0] = -pm.location * out[0];
            }
        }
        Self::new(out)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Max-modulus coefficient norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Drops leading coefficients with `|a_n| <= rel * ‖a‖`.
    pub fn trim(&self, rel: f64) -> Self {
        self.trim_below(rel * self.norm())
    }

    /// Drops leading coefficients with `|a_n| <= bound`.
    pub fn trim_below(&self, bound: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while let Some(last) = coeffs.last() {
            if last.norm() <= bound {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self::new(coeffs)
    }

    /// `self + other` with leading coefficients dropped while they cancel to
    /// within `rel` of the magnitudes of the two summand coefficients.
    pub fn add_trimmed(&self, other: &Poly, rel: f64) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs: Vec<Complex64> = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        while let Some(last) = coeffs.last() {
            let i = coeffs.len() - 1;
            if last.norm() <= rel * (self.coeff(i).norm() + other.coeff(i).norm()) {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self::new(coeffs)
    }

    /// Zero polynomial if every coefficient is below `rel * scale`.
    pub fn is_negligible(&self, rel: f64, scale: f64) -> bool {
        self.norm() <= rel * scale
    }

    pub fn divrem(&self, b: &Poly) -> Result<(Poly, Poly)> {
        let Some(db) = b.degree() else {
            return Err(Error::arg("polynomial division by zero"));
        };
        let Some(da) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if da < db {
            return Ok((Poly::zero(), self.clone()));
        }
        let lead = b.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; da - db + 1];
        for k in (0..=da - db).rev() {
            let t = rem[k + db] / lead;
            quot[k] = t;
            for (j, bj) in b.coeffs.iter().enumerate() {
                rem[k + j] -= t * bj;
            }
            rem[k + db] = ZERO;
        }
        rem.truncate(db);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Synthetic division by `z - r`; returns (quotient, remainder = a(r)).
    pub fn deflate(&self, r: Complex64) -> (Poly, Complex64) {
        let (q, rem) = synthetic(&self.coeffs, r);
        (Poly::new(q), rem)
    }

    /// Quotient of division by `z - r` when `r` is known to be a root.
    ///
    /// Forward recurrence for `|r| <= 1`, backward (from the constant term)
    /// otherwise, so the recurrence never amplifies by `|r|`.
    pub fn deflate_root(&self, r: Complex64) -> Poly {
        let n = self.coeffs.len();
        if n <= 1 {
            return Poly::zero();
        }
        if r.norm() <= 1.0 {
            return self.deflate(r).0;
        }
        // a_0 = -r q_0,  a_k = q_{k-1} - r q_k
        let mut q = vec![ZERO; n - 1];
        let rinv = r.inv();
        q[0] = -self.coeffs[0] * rinv;
        for k in 1..n - 1 {
            q[k] = (q[k - 1] - self.coeffs[k]) * rinv;
        }
        // The top coefficient is known exactly: q_{n-2} = a_{n-1}.
        q[n - 2] = self.coeffs[n - 1];
        Poly::new(q)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    /// `Σ |a_i| |z|^i`, the natural scale of rounding error in `eval(z)`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// Coefficients of `a(αz + β)`.
    pub fn compose_affine(&self, alpha: Complex64, beta: Complex64) -> Poly {
        let mut out: Vec<Complex64> = Vec::with_capacity(self.coeffs.len());
        for c in self.coeffs.iter().rev() {
            // out <- out * (αz + β) + c
            out.push(ZERO);
            for i in (1..out.len()).rev() {
                out[i] = out[i] * beta + out[i - 1] * alpha;
            }
            out[0] = out[0] * beta + c;
        }
        Poly::new(out)
    }

    /// Order of vanishing at `z0`: the number of leading Taylor coefficients
    /// at `z0` that are negligible, found by repeated synthetic division.
    ///
    /// The j-th Taylor coefficient is compared against
    /// `tol * Σ_i C(i, j) |a_i| |z0|^{i-j} + 1e-12 ‖a‖`. The sum is the
    /// sensitivity of the coefficient to relative perturbations of size `tol`
    /// and reduces to `|a_j|` at the origin; the floor absorbs rounding left by
    /// cancellations that produced the coefficients.
    pub fn order_at(&self, z0: Complex64, tol: f64) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::arg("order of vanishing of the zero polynomial"));
        }
        Ok(self.order_at_unchecked(z0, tol))
    }

    pub(crate) fn order_at_unchecked(&self, z0: Complex64, tol: f64) -> usize {
        let norm = self.norm();
        let r = z0.norm();
        let mut cur = self.coeffs.clone();
        let mut abs: Vec<f64> = self.coeffs.iter().map(|c| c.norm()).collect();
        let mut k = 0;
        while cur.len() > 1 {
            let (q, rem) = synthetic(&cur, z0);
            let (qa, rem_abs) = synthetic_abs(&abs, r);
            if rem.norm() > tol * rem_abs + ORDER_NOISE_FLOOR * norm {
                break;
            }
            k += 1;
            cur = q;
            abs = qa;
        }
        k
    }

    /// All roots with multiplicities.
    ///
    /// Exact zero low-order coefficients give a root at the origin directly.
    /// The remaining factor is solved by Aberth–Ehrlich iteration started on a
    /// rotated circle whose radius is the Fujiwara coefficient-ratio bound.
    /// Approximations are then clustered: a group of `m` nearby
    /// approximations becomes one root of multiplicity `m` at its centroid
    /// when the polynomial and its first `m - 1` derivatives vanish there to
    /// `tol` (see [`Poly::order_at`]). Groups tighter than `tol (1 + |root|)`
    /// always pass that test, so such roots always merge.
    pub fn roots(&self, tol: f64) -> Result<Vec<PointMult>> {
        match self.degree() {
            None | Some(0) => {
                return Err(Error::arg("root finding needs degree >= 1"));
            }
            _ => {}
        }
        let zeros_at_origin = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        let reduced = Poly::new(self.coeffs[zeros_at_origin..].to_vec());
        let mut out = Vec::new();
        if zeros_at_origin > 0 {
            out.push(PointMult::new(ZERO, zeros_at_origin));
        }
        if reduced.degree().unwrap_or(0) >= 1 {
            let approx = aberth(&reduced, tol)?;
            out.extend(cluster(&reduced, &approx, tol));
        }
        Ok(out)
    }
}

fn synthetic(coeffs: &[Complex64], r: Complex64) -> (Vec<Complex64>, Complex64) {
    let n = coeffs.len();
    if n == 0 {
        return (Vec::new(), ZERO);
    }
    let mut q = vec![ZERO; n - 1];
    let mut acc = coeffs[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = coeffs[k] + r * acc;
    }
    (q, acc)
}

fn synthetic_abs(coeffs: &[f64], r: f64) -> (Vec<f64>, f64) {
    let n = coeffs.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut q = vec![0.0; n - 1];
    let mut acc = coeffs[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = coeffs[k] + r * acc;
    }
    (q, acc)
}

/// Newton correction `p(z)/p'(z)` and whether `p(z)` is already at the
/// rounding floor. For `|z| > 1` the reversed polynomial is used so large
/// iterates do not overflow.
fn newton_ratio(p: &Poly, z: Complex64) -> (Complex64, bool) {
    let n = p.coeffs.len() - 1;
    let floor = 4.0 * (n as f64 + 1.0) * f64::EPSILON;
    if z.norm() <= 1.0 {
        let mut v = ZERO;
        let mut d = ZERO;
        for c in p.coeffs.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        let converged = v.norm() <= floor * p.eval_scale(z);
        (v / d, converged)
    } else {
        let u = z.inv();
        let mut v = ZERO;
        let mut d = ZERO;
        let mut scale = 0.0;
        let un = u.norm();
        for c in p.coeffs.iter() {
            d = d * u + v;
            v = v * u + c;
            scale = scale * un + c.norm();
        }
        let converged = v.norm() <= floor * scale;
        // p(z)/p'(z) = z P(u) / (n P(u) - u P'(u))
        let den = v * n as f64 - u * d;
        (z * v / den, converged)
    }
}

fn fujiwara_bound(p: &Poly) -> f64 {
    let n = p.coeffs.len() - 1;
    let lead = p.leading().norm();
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let mut ratio = p.coeffs[n - k].norm() / lead;
        if k == n {
            ratio /= 2.0;
        }
        bound = bound.max(ratio.powf(1.0 / k as f64));
    }
    (2.0 * bound).max(f64::MIN_POSITIVE)
}

fn aberth(p: &Poly, tol: f64) -> Result<Vec<Complex64>> {
    let n = p.coeffs.len() - 1;
    if n == 1 {
        return Ok(vec![-p.coeffs[0] / p.coeffs[1]]);
    }
    let radius = fujiwara_bound(p);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..ROOT_ITERATION_CAP {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, converged) = newton_ratio(p, z[i]);
            if converged {
                done[i] = true;
                continue;
            }
            all = false;
            if !ratio.is_finite() {
                // Nudge off a stationary point of p.
                let bump = Complex64::new(1e-3, 1e-3) * (1.0 + z[i].norm());
                z[i] += bump;
                continue;
            }
            let mut s = ZERO;
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    if d != ZERO {
                        s += d.inv();
                    }
                }
            }
            let w = ratio / (ONE - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                if w.norm() <= f64::EPSILON * z[i].norm() {
                    done[i] = true;
                }
            } else {
                let bump = Complex64::new(1e-3, 1e-3) * (1.0 + z[i].norm());
                z[i] += bump;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // Accept the iterate if every residual meets the documented bound.
    let norm = p.norm();
    let ok = z
        .iter()
        .all(|zi| p.eval(*zi).norm() <= tol * norm * (1.0 + zi.norm()).powi(n as i32));
    if ok {
        Ok(z)
    } else {
        Err(Error::SolverFailure {
            iterations: ROOT_ITERATION_CAP,
            best: z,
        })
    }
}

/// Newton on `p^{(m-1)}`, which has a simple root where `p` has an `m`-fold
/// one. The centroid of a cluster is only accurate to about `ε^{1/m}`; this
/// brings it back to working precision. Steps leaving `reach` are rejected.
fn polish_multiple(p: &Poly, start: Complex64, m: usize, reach: f64) -> Complex64 {
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let dd = d.derivative();
    let mut z = start;
    for _ in 0..8 {
        let step = d.eval(z) / dd.eval(z);
        if !step.is_finite() {
            break;
        }
        let next = z - step;
        if (next - start).norm() > reach {
            break;
        }
        z = next;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

fn cluster(p: &Poly, approx: &[Complex64], tol: f64) -> Vec<PointMult> {
    let n = approx.len();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let ri = approx[i];
        let mut cand: Vec<usize> = (0..n).filter(|&j| !assigned[j]).collect();
        cand.sort_by(|&a, &b| {
            (approx[a] - ri)
                .norm()
                .total_cmp(&(approx[b] - ri).norm())
                .then(a.cmp(&b))
        });
        let mut chosen = 1;
        let mut location = ri;
        for m in (2..=cand.len()).rev() {
            let reach = 4.0 * tol.powf(1.0 / m as f64) * (1.0 + ri.norm());
            if (approx[cand[m - 1]] - ri).norm() > reach {
                continue;
            }
            let centroid =
                cand[..m].iter().map(|&j| approx[j]).sum::<Complex64>() / m as f64;
            let centroid = polish_multiple(p, centroid, m, reach);
            if p.order_at_unchecked(centroid, tol) >= m {
                chosen = m;
                location = centroid;
                break;
            }
        }
        for &j in &cand[..chosen] {
            assigned[j] = true;
        }
        out.push(PointMult::new(location, chosen));
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
