//! Nevanlinna functionals of rational functions and the Hahn-type reduced
//! counting functions.
//!
//! Counting functions are closed forms over root data:
//!
//! ```text
//! N(r) = Σ_{0<|z_j|≤r} m_j log(r/|z_j|) + n(0) log r
//! ```
//!
//! and the proximity function `m(r, g) = (1/2π) ∫ log⁺|g(re^{iθ})| dθ` uses
//! adaptive Gauss–Kronrod quadrature on `nθ` equal panels, with extra panel
//! breaks at the angles of zeros and poles close to the circle.
//!
//! The reduced count `n̂` gives a solution `z` of `g = a` of multiplicity `n`
//! the weight `n - min(n, m')`, where `m'` is the order of vanishing of `D g`
//! at `z` (of `D(1/g)` for poles).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cpoly::{PointMult, Poly};
use crate::error::{Error, Result};
use crate::hahn::{hahn_diff, hahn_reciprocal};
use crate::qcore::HahnParams;
use crate::ratfun::{RatFun, Target};

/// Strictly increasing positive radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    radii: Vec<f64>,
}

impl Grid {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::arg("radius grid is empty"));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::arg("radii must be positive and finite"));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg("radii must be strictly increasing"));
        }
        Ok(Self { radii })
    }

    /// `n` radii spaced evenly in `log r` from `r_min` to `r_max`.
    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::arg("a geometric grid needs at least 2 points"));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::arg(format!(
                "need 0 < r_min < r_max, got {r_min} and {r_max}"
            )));
        }
        let ratio = r_max / r_min;
        let mut radii: Vec<f64> = (0..n)
            .map(|j| r_min * ratio.powf(j as f64 / (n - 1) as f64))
            .collect();
        radii[n - 1] = r_max;
        Self::new(radii)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    /// Index of the first radius in the top `fraction` of the grid (at
    /// least one radius is always included).
    pub fn top_start(&self, fraction: f64) -> usize {
        let n = self.radii.len();
        let count = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        n - count
    }

    /// The top `fraction` of the grid as its own grid.
    pub fn top(&self, fraction: f64) -> Grid {
        Grid {
            radii: self.radii[self.top_start(fraction)..].to_vec(),
        }
    }
}

impl Default for Grid {
    /// `r = 2^{j/2}` for `j = 0..=40`, i.e. `1 ≤ r ≤ 2^20`.
    fn default() -> Self {
        Self {
            radii: (0..=40).map(|j| 2f64.powf(j as f64 / 2.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NevOptions {
    /// Equal base panels on `[0, 2π)`.
    pub theta_panels: usize,
    /// Absolute error target for `m(r, ·)`.
    pub quad_tol: f64,
    pub max_depth: usize,
    /// Allowance `κ T(r)` in the second-main-theorem slack column.
    pub slack_fraction: f64,
}

impl Default for NevOptions {
    fn default() -> Self {
        Self {
            theta_panels: 64,
            quad_tol: 1e-10,
            max_depth: 40,
            slack_fraction: 0.05,
        }
    }
}

impl NevOptions {
    pub fn validate(&self) -> Result<()> {
        if self.theta_panels == 0 {
            return Err(Error::arg("theta panel count must be positive"));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::arg("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// Radii within `1e-9 r` of one of these moduli are moved to `r (1 + 1e-8)`.
pub fn nudge_radius(r: f64, moduli: &[f64]) -> f64 {
    let mut r = r;
    for _ in 0..8 {
        if moduli.iter().any(|&m| (m - r).abs() <= 1e-9 * r) {
            r *= 1.0 + 1e-8;
        } else {
            break;
        }
    }
    r
}

/// Points closer to the origin than the cluster tolerance count as the origin.
pub(crate) fn origin_snap(tol: f64) -> f64 {
    tol
}

/// `Σ weight` over points with `|z| ≤ r`.
pub(crate) fn count_weighted(points: &[(Complex64, usize)], r: f64, snap: f64) -> usize {
    points
        .iter()
        .filter(|(z, _)| z.norm() <= snap || z.norm() <= r)
        .map(|(_, w)| w)
        .sum()
}

/// Closed-form integrated counting function of a weighted point set.
pub(crate) fn integrate_weighted(points: &[(Complex64, usize)], r: f64, snap: f64) -> f64 {
    points
        .iter()
        .map(|&(z, w)| {
            let m = z.norm();
            if m <= snap {
                w as f64 * r.ln()
            } else if m <= r {
                w as f64 * (r / m).ln()
            } else {
                0.0
            }
        })
        .fold(0.0, |acc, v| acc + v)
}

fn as_weighted(points: &[PointMult]) -> Vec<(Complex64, usize)> {
    points.iter().map(|p| (p.location, p.mult)).collect()
}

/// `n(r, g = a)`.
pub fn counting_n(g: &RatFun, r: f64, a: Target) -> Result<usize> {
    let pts = g.a_points(a)?;
    Ok(count_weighted(&as_weighted(&pts), r, origin_snap(g.tol())))
}

/// `N(r, g = a)`.
pub fn integrated_n(g: &RatFun, r: f64, a: Target) -> Result<f64> {
    check_radius(r)?;
    let pts = g.a_points(a)?;
    Ok(integrate_weighted(&as_weighted(&pts), r, origin_snap(g.tol())))
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("radius must be positive, got {r}")))
    }
}

/// `log|P|` from the leading coefficient and the roots, which stays accurate
/// next to clustered roots where the expanded form loses digits.
struct Factored {
    log_lead: f64,
    roots: Vec<PointMult>,
}

impl Factored {
    fn new(p: &Poly, tol: f64) -> Result<Self> {
        let roots = if p.is_constant() { Vec::new() } else { p.roots(tol)? };
        Ok(Self {
            log_lead: p.leading().norm().ln(),
            roots,
        })
    }

    fn from_roots(lead: Complex64, roots: &[PointMult]) -> Self {
        Self {
            log_lead: lead.norm().ln(),
            roots: roots.to_vec(),
        }
    }

    fn log_abs(&self, z: Complex64) -> f64 {
        self.roots
            .iter()
            .fold(self.log_lead, |acc, pt| acc + pt.mult as f64 * (z - pt.location).norm().ln())
    }
}

/// `log⁺|P/Q|` on circles, plus the points where it is singular.
struct LogPlus {
    p: Option<Factored>,
    q: Factored,
}

impl LogPlus {
    /// Integrand for `m(r, g)` (`a = ∞`) or `m(r, 1/(g - a))`.
    fn new(g: &RatFun, a: Target) -> Result<Self> {
        let den = Factored::from_roots(g.den().leading(), g.poles());
        match a {
            Target::Infinity => {
                let p = if g.num().is_zero() {
                    None
                } else {
                    Some(Factored::new(g.num(), g.tol())?)
                };
                Ok(Self { p, q: den })
            }
            Target::Finite(a) => {
                let shifted = g.shifted_num(a);
                if shifted.is_zero() {
                    return Err(Error::degenerate(format!("g is identically {a}")));
                }
                Ok(Self {
                    p: Some(den),
                    q: Factored::new(&shifted, g.tol())?,
                })
            }
        }
    }

    fn critical(&self) -> impl Iterator<Item = Complex64> + '_ {
        let p = self.p.iter().flat_map(|f| f.roots.iter());
        p.chain(self.q.roots.iter()).map(|pt| pt.location)
    }

    fn moduli(&self) -> Vec<f64> {
        self.critical().map(|z| z.norm()).collect()
    }

    fn at(&self, p: &Factored, r: f64, theta: f64) -> f64 {
        let z = Complex64::from_polar(r, theta);
        let v = p.log_abs(z) - self.q.log_abs(z);
        if v > 0.0 {
            v
        } else {
            0.0
        }
    }

    fn integrate(&self, r: f64, opts: &NevOptions) -> f64 {
        let Some(p) = &self.p else {
            return 0.0;
        };
        let two_pi = 2.0 * PI;
        let mut breaks: Vec<f64> = (0..=opts.theta_panels)
            .map(|j| two_pi * j as f64 / opts.theta_panels as f64)
            .collect();
        for z in self.critical() {
            let m = z.norm();
            if m > 0.0 && (m - r).abs() <= 0.5 * r {
                breaks.push(z.arg().rem_euclid(two_pi));
            }
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let f = |t: f64| self.at(p, r, t);
        let total: f64 = breaks
            .windows(2)
            .map(|w| {
                let tol = opts.quad_tol * (w[1] - w[0]);
                adaptive_gk(&f, w[0], w[1], tol, opts.max_depth)
            })
            .sum();
        total / two_pi
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for nodes 1, 3, 5 and the center.
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut k = GK_WEIGHTS_K[7] * fc;
    let mut g = GK_WEIGHTS_G[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        k += GK_WEIGHTS_K[i] * s;
        if i % 2 == 1 {
            g += GK_WEIGHTS_G[i / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let (est, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || !est.is_finite() {
        return est;
    }
    let mid = 0.5 * (a + b);
    adaptive_gk(f, a, mid, 0.5 * tol, depth - 1) + adaptive_gk(f, mid, b, 0.5 * tol, depth - 1)
}

/// `m(r, g)` for `a = ∞`, `m(r, 1/(g - a))` otherwise, at the nudged radius.
pub fn proximity_m(g: &RatFun, r: f64, a: Target, opts: &NevOptions) -> Result<f64> {
    check_radius(r)?;
    opts.validate()?;
    let lp = LogPlus::new(g, a)?;
    let r = nudge_radius(r, &lp.moduli());
    Ok(lp.integrate(r, opts))
}

/// `(r_eval, m(r_eval, ·))` for every grid radius, as in [`proximity_m`].
pub fn proximity_on_grid(
    g: &RatFun,
    a: Target,
    grid: &Grid,
    opts: &NevOptions,
) -> Result<Vec<(f64, f64)>> {
    opts.validate()?;
    let lp = LogPlus::new(g, a)?;
    let moduli = lp.moduli();
    Ok(grid
        .radii()
        .par_iter()
        .map(|&r| {
            let r = nudge_radius(r, &moduli);
            (r, lp.integrate(r, opts))
        })
        .collect())
}

/// `T(r, g) = m(r, g) + N(r, g)`, both at the nudged radius.
pub fn characteristic_t(g: &RatFun, r: f64, opts: &NevOptions) -> Result<f64> {
    check_radius(r)?;
    opts.validate()?;
    let lp = LogPlus::new(g, Target::Infinity)?;
    let r = nudge_radius(r, &lp.moduli());
    let poles = as_weighted(g.poles());
    Ok(lp.integrate(r, opts) + integrate_weighted(&poles, r, origin_snap(g.tol())))
}

/// Solutions of `g = a` with their reduced weights `n - min(n, m')`.
pub fn nhat_points(g: &RatFun, a: Target, p: &HahnParams) -> Result<Vec<(Complex64, usize, usize)>> {
    let pts = g.a_points(a)?;
    if pts.is_empty() {
        return Ok(Vec::new());
    }
    let witness = match a {
        Target::Finite(_) => hahn_diff(g, p),
        Target::Infinity => hahn_reciprocal(g, p)?,
    };
    Ok(pts
        .iter()
        .map(|pt| {
            let m_prime = witness.order_at(pt.location).max(0) as u64;
            let n = pt.mult as u64;
            let reduced = n - n.min(m_prime);
            (pt.location, pt.mult, reduced as usize)
        })
        .collect())
}

fn reduced_weights(pts: &[(Complex64, usize, usize)]) -> Vec<(Complex64, usize)> {
    pts.iter().map(|&(z, _, w)| (z, w)).collect()
}

/// `n̂_{q,c}(r, g = a)`.
pub fn nhat_counting(g: &RatFun, r: f64, a: Target, p: &HahnParams) -> Result<usize> {
    let pts = nhat_points(g, a, p)?;
    Ok(count_weighted(&reduced_weights(&pts), r, origin_snap(g.tol())))
}

/// `N̂_{q,c}(r, g = a)`.
pub fn nhat_integrated(g: &RatFun, r: f64, a: Target, p: &HahnParams) -> Result<f64> {
    check_radius(r)?;
    let pts = nhat_points(g, a, p)?;
    Ok(integrate_weighted(&reduced_weights(&pts), r, origin_snap(g.tol())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetColumns {
    pub target: Target,
    /// `n(r, g = a)`.
    pub count: usize,
    /// `n̂_{q,c}(r, g = a)`.
    pub count_hat: usize,
    /// `N(r, g = a)`.
    pub n: f64,
    /// `N̂_{q,c}(r, g = a)`.
    pub n_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NevRow {
    pub r: f64,
    /// Radius actually used; differs from `r` after a nudge.
    pub r_eval: f64,
    pub m: f64,
    /// `N(r, g)`, the pole counting function.
    pub n: f64,
    pub t: f64,
    pub targets: Vec<TargetColumns>,
    /// `2 N(r, g) - N(r, D g) + N(r, 1/D g)`.
    pub n_qc: f64,
    /// `Σ N̂ + κ T - (l - 2) T` over the table targets.
    pub slack: f64,
}

impl NevRow {
    pub fn nudged(&self) -> bool {
        self.r_eval != self.r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NevTable {
    pub params: HahnParams,
    pub targets: Vec<Target>,
    pub options: NevOptions,
    pub rows: Vec<NevRow>,
}

struct TargetData {
    target: Target,
    pts: Vec<(Complex64, usize)>,
    reduced: Vec<(Complex64, usize)>,
}

impl NevTable {
    /// One row per radius, computed in parallel and collected in grid order.
    pub fn build(
        g: &RatFun,
        targets: &[Target],
        p: &HahnParams,
        grid: &Grid,
        opts: &NevOptions,
    ) -> Result<NevTable> {
        opts.validate()?;
        if g.is_constant() {
            return Err(Error::arg("Nevanlinna table needs a nonconstant function"));
        }
        let snap = origin_snap(g.tol());
        let lp = LogPlus::new(g, Target::Infinity)?;
        let poles = as_weighted(g.poles());
        let dg = hahn_diff(g, p);
        let dg_poles = as_weighted(dg.poles());
        let dg_zeros = as_weighted(&dg.a_points(Target::Finite(Complex64::new(0.0, 0.0)))?);

        let mut data = Vec::with_capacity(targets.len());
        for &t in targets {
            let hat = nhat_points(g, t, p)?;
            data.push(TargetData {
                target: t,
                pts: hat.iter().map(|&(z, n, _)| (z, n)).collect(),
                reduced: reduced_weights(&hat),
            });
        }

        let mut moduli = lp.moduli();
        moduli.extend(dg_poles.iter().chain(&dg_zeros).map(|(z, _)| z.norm()));
        for d in &data {
            moduli.extend(d.pts.iter().map(|(z, _)| z.norm()));
        }

        let l = targets.len() as f64;
        let rows = grid
            .radii()
            .par_iter()
            .map(|&r| {
                let r_eval = nudge_radius(r, &moduli);
                let m = lp.integrate(r_eval, opts);
                let n = integrate_weighted(&poles, r_eval, snap);
                let t = m + n;
                let cols: Vec<TargetColumns> = data
                    .iter()
                    .map(|d| TargetColumns {
                        target: d.target,
                        count: count_weighted(&d.pts, r_eval, snap),
                        count_hat: count_weighted(&d.reduced, r_eval, snap),
                        n: integrate_weighted(&d.pts, r_eval, snap),
                        n_hat: integrate_weighted(&d.reduced, r_eval, snap),
                    })
                    .collect();
                let n_qc = 2.0 * n - integrate_weighted(&dg_poles, r_eval, snap)
                    + integrate_weighted(&dg_zeros, r_eval, snap);
                let sum_hat: f64 = cols.iter().map(|c| c.n_hat).sum();
                let slack = sum_hat + opts.slack_fraction * t - (l - 2.0) * t;
                NevRow {
                    r,
                    r_eval,
                    m,
                    n,
                    t,
                    targets: cols,
                    n_qc,
                    slack,
                }
            })
            .collect();
        Ok(NevTable {
            params: *p,
            targets: targets.to_vec(),
            options: *opts,
            rows,
        })
    }
}

/// Finite-radius estimates of `δ(a)`, `θ_{q,c}(a)` and `Θ_{q,c}(a)` taken
/// over the top 20% of the grid. They are one-sided proxies of the lim sup
/// and lim inf definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectIndices {
    pub delta: f64,
    pub theta: f64,
    pub big_theta: f64,
}

pub const DEFECT_TOP_FRACTION: f64 = 0.2;
pub const DEFECT_MIN_GRID: usize = 20;

pub fn defect_indices(
    g: &RatFun,
    a: Target,
    p: &HahnParams,
    grid: &Grid,
    opts: &NevOptions,
) -> Result<DefectIndices> {
    if grid.len() < DEFECT_MIN_GRID {
        return Err(Error::arg(format!(
            "defect estimates need at least {DEFECT_MIN_GRID} radii, got {}",
            grid.len()
        )));
    }
    let table = NevTable::build(g, &[a], p, &grid.top(DEFECT_TOP_FRACTION), opts)?;
    defects_from_rows(&table.rows, 0)
}

/// Defect proxies for target column `col` from already computed rows.
pub fn defects_from_rows(rows: &[NevRow], col: usize) -> Result<DefectIndices> {
    let last = rows.last().ok_or_else(|| Error::arg("no rows"))?;
    if last.t < 1e-6 {
        return Err(Error::degenerate(format!(
            "T(r) = {} at the top radius is too small for defect ratios",
            last.t
        )));
    }
    let mut max_n = f64::NEG_INFINITY;
    let mut max_hat = f64::NEG_INFINITY;
    let mut min_diff = f64::INFINITY;
    for row in rows.iter().filter(|row| row.t >= 1e-6) {
        let c = &row.targets[col];
        max_n = max_n.max(c.n / row.t);
        max_hat = max_hat.max(c.n_hat / row.t);
        min_diff = min_diff.min((c.n - c.n_hat) / row.t);
    }
    Ok(DefectIndices {
        delta: 1.0 - max_n,
        theta: min_diff,
        big_theta: 1.0 - max_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// Slope of `log T` against `log r`.
    pub rho: f64,
    /// Slope of `log T` against `log log r`.
    pub rho_log: f64,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Least-squares growth orders over the top half of `(r, T)` samples.
pub fn order_estimators(samples: &[(f64, f64)]) -> Result<OrderEstimate> {
    if samples.len() < 10 {
        return Err(Error::arg(format!(
            "order estimates need at least 10 rows, got {}",
            samples.len()
        )));
    }
    let r_lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let r_hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if !(r_lo > 0.0 && r_hi / r_lo >= 1e4) {
        return Err(Error::arg("order estimates need radii spanning 4 decades"));
    }
    let top = &samples[samples.len() / 2..];
    if top.iter().any(|&(r, t)| !(r > 1.0 && t > 0.0)) {
        return Err(Error::arg(
            "order estimates need r > 1 and T > 0 over the top half",
        ));
    }
    let log_r: Vec<f64> = top.iter().map(|s| s.0.ln()).collect();
    let log_log_r: Vec<f64> = log_r.iter().map(|x| x.ln()).collect();
    let log_t: Vec<f64> = top.iter().map(|s| s.1.ln()).collect();
    Ok(OrderEstimate {
        rho: ls_slope(&log_r, &log_t),
        rho_log: ls_slope(&log_log_r, &log_t),
    })
}

/// Counting function of the zero set `{q^{-n} : n ≥ 0}` of `(z; q)_∞`:
/// `N(r) = Σ_{|q|^{-n} ≤ r} log(r |q|^n)`.
pub fn pochhammer_zero_counting(q_modulus: f64, r: f64) -> Result<f64> {
    if !(q_modulus > 0.0 && q_modulus < 1.0) {
        return Err(Error::param(format!("need 0 < |q| < 1, got {q_modulus}")));
    }
    check_radius(r)?;
    let mut total = 0.0;
    let mut modulus = 1.0;
    while modulus <= r * (1.0 + 1e-14) {
        total += (r / modulus).ln().max(0.0);
        modulus /= q_modulus;
    }
    Ok(total)
}
