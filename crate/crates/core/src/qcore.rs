//! q-calculus primitives and the affine orbit `σ(z) = qz + c`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Parameters `(q, c)` of the Hahn operator together with the fixed point
/// `z0 = c / (1 - q)` of `σ`.
///
/// Construction only enforces `q ∉ {0, 1}`, which is what the operator
/// itself needs. Operations that rely on `0 < |q| < 1` call
/// [`HahnParams::require_theorem_valid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HahnParams {
    q: Complex64,
    c: Complex64,
    z0: Complex64,
}

impl HahnParams {
    pub fn new(q: Complex64, c: Complex64) -> Result<Self> {
        if !(q.re.is_finite() && q.im.is_finite() && c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::param("q and c must be finite"));
        }
        if q == ZERO || q == ONE {
            return Err(Error::param(format!("q must avoid 0 and 1, got {q}")));
        }
        Ok(Self {
            q,
            c,
            z0: c / (ONE - q),
        })
    }

    /// Real-valued convenience constructor.
    pub fn real(q: f64, c: f64) -> Result<Self> {
        Self::new(Complex64::new(q, 0.0), Complex64::new(c, 0.0))
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// Fixed point of `σ`, the zero of `(q - 1) z + c`.
    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    /// `q ∉ {0, 1}`; always true for a constructed value.
    pub fn is_operator_valid(&self) -> bool {
        self.q != ZERO && self.q != ONE
    }

    /// `0 < |q| < 1`, the regime the value-distribution results are stated in.
    pub fn is_theorem_valid(&self) -> bool {
        let m = self.q.norm();
        m > 0.0 && m < 1.0
    }

    pub fn require_theorem_valid(&self) -> Result<()> {
        if self.is_theorem_valid() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "this operation needs 0 < |q| < 1, got |q| = {}",
                self.q.norm()
            )))
        }
    }

    /// `σ(z) = qz + c`.
    pub fn sigma(&self, z: Complex64) -> Complex64 {
        self.q * z + self.c
    }

    /// `σ^{-1}(w) = (w - c) / q`.
    pub fn sigma_inv(&self, w: Complex64) -> Complex64 {
        (w - self.c) / self.q
    }

    /// `(q - 1) z + c`.
    pub fn denominator(&self, z: Complex64) -> Complex64 {
        (self.q - ONE) * z + self.c
    }
}

/// `[n]_q = (q^n - 1)/(q - 1) = 1 + q + ... + q^{n-1}`.
pub fn q_integer(n: u32, q: Complex64) -> Result<Complex64> {
    if q == ONE {
        return Err(Error::param("q-integer needs q != 1"));
    }
    Ok(geometric_sum(n, q))
}

// Summed directly while it is short; the closed form loses digits as q -> 1.
pub(crate) fn geometric_sum(n: u32, q: Complex64) -> Complex64 {
    if n <= 256 || q == ONE {
        let mut acc = ZERO;
        for _ in 0..n {
            acc = acc * q + ONE;
        }
        acc
    } else {
        (q.powu(n) - ONE) / (q - ONE)
    }
}

/// Finite q-Pochhammer symbol `(a; q)_n = ∏_{k<n} (1 - a q^k)`.
pub fn pochhammer_n(a: Complex64, q: Complex64, n: u32) -> Complex64 {
    let mut prod = ONE;
    let mut aq = a;
    for _ in 0..n {
        prod *= ONE - aq;
        aq *= q;
    }
    prod
}

/// Number of factors needed so the neglected tail satisfies
/// `|a| |q|^N / (1 - |q|) < tol`.
pub fn pochhammer_inf_terms(a: Complex64, q: Complex64, tol: f64) -> Result<u32> {
    let qm = q.norm();
    if !(qm > 0.0 && qm < 1.0) {
        return Err(Error::param(format!(
            "(a;q)_inf needs 0 < |q| < 1, got |q| = {qm}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let am = a.norm();
    if am == 0.0 {
        return Ok(0);
    }
    // |a| |q|^N < tol (1 - |q|)
    let needed = ((tol * (1.0 - qm)) / am).ln() / qm.ln();
    Ok(needed.max(0.0).floor() as u32 + 1)
}

/// Infinite q-Pochhammer symbol `(a; q)_∞`, truncated by the geometric tail
/// bound. For `|a q^N| ≤ 1/2` the tail contributes a log-error of at most
/// `2 Σ_{n≥N} |a| |q|^n < 2 tol`.
pub fn pochhammer_inf(a: Complex64, q: Complex64, tol: f64) -> Result<Complex64> {
    let n = pochhammer_inf_terms(a, q, tol)?;
    Ok(pochhammer_n(a, q, n))
}

/// Gaussian binomial coefficient `[n choose j]_q`, built from the telescoping
/// ratios `(1 - q^{n-k+1}) / (1 - q^k)`.
pub fn gauss_binomial(n: u32, j: i64, q: Complex64) -> Result<Complex64> {
    if j < 0 || j > n as i64 {
        return Err(Error::param(format!(
            "Gaussian binomial index j = {j} outside 0..={n}"
        )));
    }
    let j = j as u32;
    let j = j.min(n - j);
    let mut acc = ONE;
    for k in 1..=j {
        // (1 - q^m)/(1 - q) = [m]_q keeps the ratio finite as q -> 1.
        let num = geometric_sum(n - k + 1, q);
        let den = geometric_sum(k, q);
        if den == ZERO {
            return Err(Error::DegenerateParameter(format!(
                "[{k}]_q vanishes; q is a root of unity of order <= {n}"
            )));
        }
        acc *= num / den;
    }
    Ok(acc)
}

/// k-fold orbit `σ^k(z) = q^k z + c [k]_q`.
pub fn sigma_k(z: Complex64, k: u32, p: &HahnParams) -> Complex64 {
    p.q.powu(k) * z + p.c * geometric_sum(k, p.q)
}

/// Affine coefficients `(α, β)` with `σ^k(z) = α z + β`.
pub fn sigma_k_affine(k: u32, p: &HahnParams) -> (Complex64, Complex64) {
    (p.q.powu(k), p.c * geometric_sum(k, p.q))
}
