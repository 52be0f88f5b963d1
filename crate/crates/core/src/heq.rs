//! Truncated power series at the fixed point `z0` and linear Hahn equations
//!
//! ```text
//! D^k g + A_{k-1} D^{k-1} g + ... + A_0 g = 0.
//! ```
//!
//! In `w = z - z0` the operator is diagonal: `(q - 1) z + c = (q - 1) w` and
//! `g(σz)` has coefficients `a_n q^n`, so `D w^n = [n]_q w^{n-1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hahn::hahn_iter;
use crate::qcore::HahnParams;
use crate::ratfun::{RatFun, Value};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `Σ_{n≤N} a_n (z - center)^n`, truncation order `N = coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSeries {
    center: Complex64,
    coeffs: Vec<Complex64>,
}

fn centers_match(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

impl PowerSeries {
    /// An empty coefficient list is read as the zero series of order 0.
    pub fn new(center: Complex64, mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        Self { center, coeffs }
    }

    pub fn constant(center: Complex64, value: Complex64, trunc: usize) -> Self {
        let mut coeffs = vec![ZERO; trunc + 1];
        coeffs[0] = value;
        Self { center, coeffs }
    }

    /// Taylor expansion of `g` at `center`; needs `g` finite there.
    pub fn from_ratfun(g: &RatFun, center: Complex64, trunc: usize) -> Result<Self> {
        let num = Self::from_coeffs_at(g.num().compose_affine(ONE, center).coeffs(), center, trunc);
        if g.is_polynomial() {
            return Ok(num);
        }
        let den = Self::from_coeffs_at(g.den().compose_affine(ONE, center).coeffs(), center, trunc);
        num.mul(&den.recip()?)
    }

    fn from_coeffs_at(shifted: &[Complex64], center: Complex64, trunc: usize) -> Self {
        let mut coeffs = vec![ZERO; trunc + 1];
        for (dst, src) in coeffs.iter_mut().zip(shifted) {
            *dst = *src;
        }
        Self { center, coeffs }
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(&self, trunc: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(trunc + 1, ZERO);
        Self {
            center: self.center,
            coeffs,
        }
    }

    fn check_center(&self, other: &Self) -> Result<()> {
        if centers_match(self.center, other.center) {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "series centers differ: {} vs {}",
                self.center, other.center
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..=n).map(|i| self.coeffs[i] + other.coeffs[i]).collect();
        Ok(Self::new(self.center, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.center, self.coeffs.iter().map(|a| a * s).collect())
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..=n)
            .map(|i| (0..=i).map(|j| self.coeffs[j] * other.coeffs[i - j]).sum())
            .collect();
        Ok(Self::new(self.center, coeffs))
    }

    /// `1/a` to the same order; needs `a_0 != 0`.
    pub fn recip(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == ZERO {
            return Err(Error::degenerate(
                "series with vanishing constant term has no reciprocal at its center",
            ));
        }
        let n = self.trunc();
        let mut b = vec![ZERO; n + 1];
        b[0] = a0.inv();
        for i in 1..=n {
            let s: Complex64 = (1..=i).map(|j| self.coeffs[j] * b[i - j]).sum();
            b[i] = -s / a0;
        }
        Ok(Self::new(self.center, b))
    }

    /// Value of the truncated sum at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z - self.center;
        self.coeffs.iter().rev().fold(ZERO, |acc, a| acc * w + a)
    }

    /// `|a_n / a_{n+1}|` for consecutive nonzero coefficients.
    pub fn coefficient_ratios(&self) -> Vec<(usize, f64)> {
        self.coeffs
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != ZERO && w[1] != ZERO)
            .map(|(n, w)| (n, (w[0] / w[1]).norm()))
            .collect()
    }

    /// Ratio-test radius from the last pair of nonzero neighbours; `None`
    /// when no such pair exists (polynomials and very sparse series).
    pub fn empirical_radius(&self) -> Option<f64> {
        self.coefficient_ratios()
            .last()
            .map(|&(_, r)| r)
            .filter(|r| r.is_finite())
    }
}

/// `D_{q,c}` on a series at `z0`: `b_n = [n+1]_q a_{n+1}`, order `N - 1`.
pub fn series_hahn(a: &PowerSeries, p: &HahnParams) -> Result<PowerSeries> {
    if !centers_match(a.center, p.z0()) {
        return Err(Error::arg(format!(
            "series must be centered at z0 = {}, got {}",
            p.z0(),
            a.center
        )));
    }
    let q = p.q();
    let mut qn = ONE; // [n+1]_q
    let mut out = Vec::with_capacity(a.trunc());
    for an in &a.coeffs[1..] {
        out.push(qn * an);
        qn = qn * q + ONE;
    }
    Ok(PowerSeries::new(a.center, out))
}

/// Formal solution of `D^k g + Σ_j A_j D^j g = 0` with `a_0..a_{k-1} = init`.
///
/// The `w^n` coefficient of `D^j g` is `a_{n+j} P_j(n)` with
/// `P_j(t) = Π_{i=1}^{j} [t+i]_q`, so
///
/// ```text
/// a_{n+k} P_k(n) = -Σ_j Σ_{m=0}^{n} A_j[m] a_{n-m+j} P_j(n-m).
/// ```
///
/// The result has order `min(N, min_j trunc(A_j) + k)`: coefficients past
/// that depend on unknown coefficients of the `A_j`.
pub fn heq_solve(
    coeffs: &[PowerSeries],
    init: &[Complex64],
    trunc: usize,
    p: &HahnParams,
) -> Result<PowerSeries> {
    p.require_theorem_valid()?;
    let k = coeffs.len();
    if k == 0 {
        return Err(Error::arg("equation order k must be at least 1"));
    }
    if init.len() != k {
        return Err(Error::arg(format!(
            "{k} initial coefficients needed, got {}",
            init.len()
        )));
    }
    for a in coeffs {
        if !centers_match(a.center, p.z0()) {
            return Err(Error::arg(format!(
                "coefficient series must be centered at z0 = {}, got {}",
                p.z0(),
                a.center
            )));
        }
    }
    let top = trunc.min(coeffs.iter().map(|a| a.trunc()).min().unwrap_or(0) + k);
    let mut a: Vec<Complex64> = init.iter().copied().take(top + 1).collect();
    if top < k {
        return Ok(PowerSeries::new(p.z0(), a));
    }

    // qint[m] = [m]_q
    let q = p.q();
    let mut qint = vec![ZERO; top + 1];
    for m in 1..=top {
        qint[m] = qint[m - 1] * q + ONE;
    }
    let pj = |t: usize, j: usize| -> Complex64 { (1..=j).map(|i| qint[t + i]).product() };

    for n in 0..=(top - k) {
        let lead = pj(n, k);
        if lead == ZERO {
            return Err(Error::DegenerateParameter(format!(
                "q-integer product vanishes at order {}; q is a root of unity",
                n + k
            )));
        }
        let mut rhs = ZERO;
        for (j, aj) in coeffs.iter().enumerate() {
            for m in 0..=n {
                let coef = aj.coeff(m);
                if coef != ZERO {
                    rhs += coef * a[n - m + j] * pj(n - m, j);
                }
            }
        }
        a.push(-rhs / lead);
    }
    Ok(PowerSeries::new(p.z0(), a))
}

/// A function whose residual is evaluated by [`heq_residual`].
#[derive(Debug, Clone, Copy)]
pub enum Candidate<'a> {
    Series(&'a PowerSeries),
    Rational(&'a RatFun),
}

/// `D^k g + Σ_j A_j D^j g` at each point. Series candidates use the
/// diagonal action, rational ones [`hahn_iter`]; a pole of `g` or an
/// iterate gives [`Value::Pole`].
pub fn heq_residual(
    coeffs: &[PowerSeries],
    g: Candidate<'_>,
    points: &[Complex64],
    p: &HahnParams,
) -> Result<Vec<Value>> {
    let k = coeffs.len();
    if k == 0 {
        return Err(Error::arg("equation order k must be at least 1"));
    }
    match g {
        Candidate::Series(s) => {
            let mut iterates = vec![s.clone()];
            for j in 0..k {
                let next = series_hahn(&iterates[j], p)?;
                iterates.push(next);
            }
            Ok(points
                .iter()
                .map(|&z| {
                    let mut acc = iterates[k].eval(z);
                    for (j, aj) in coeffs.iter().enumerate() {
                        acc += aj.eval(z) * iterates[j].eval(z);
                    }
                    Value::Finite(acc)
                })
                .collect())
        }
        Candidate::Rational(g) => {
            let mut iterates = vec![g.clone()];
            for _ in 0..k {
                iterates.push(hahn_iter(iterates.last().expect("nonempty"), 1, p)?);
            }
            Ok(points
                .iter()
                .map(|&z| {
                    let mut acc = match iterates[k].eval(z) {
                        Value::Finite(v) => v,
                        Value::Pole => return Value::Pole,
                    };
                    for (j, aj) in coeffs.iter().enumerate() {
                        match iterates[j].eval(z) {
                            Value::Finite(v) => acc += aj.eval(z) * v,
                            Value::Pole => return Value::Pole,
                        }
                    }
                    Value::Finite(acc)
                })
                .collect())
        }
    }
}

/// `z0 + ρ R` for `ρ ∈ {0.05, 0.1, 0.2}`, with `R` the empirical radius of
/// `g` (1 when none is available).
pub fn default_residual_points(g: &PowerSeries, p: &HahnParams) -> Vec<Complex64> {
    let radius = g.empirical_radius().unwrap_or(1.0);
    [0.05, 0.1, 0.2]
        .iter()
        .map(|rho| p.z0() + Complex64::new(rho * radius, 0.0))
        .collect()
}
