//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p hahn-core --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hahn_core::nevan::{nhat_counting, order_estimators, pochhammer_zero_counting};
use hahn_core::parse::ParseErrorKind;
use hahn_core::suite::{random_complex, random_params, random_polynomial_fn, random_ratfun, regression_suite, seeded};
use hahn_core::verify::{check_defect_sum, check_fermat, check_lodl, check_smt, compare_sharing};
use hahn_core::{
    format_expr, hahn_diff, hahn_expand, hahn_iter, heq_residual, heq_solve, parse_expr,
    series_hahn, Candidate, Complex64, Grid, HahnParams, NevOptions, NevTable, Poly, PowerSeries,
    RatFun, Target,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn coeff_err(a: &Poly, b: &Poly) -> f64 {
    (a - b).norm()
}

/// Coefficient gap of the cross products, relative once they exceed unit size.
/// Iterates that vanish identically come out of the expansion as rounding noise.
fn cross_gap(a: &RatFun, b: &RatFun) -> f64 {
    let left = a.num() * b.den();
    let right = b.num() * a.den();
    (&left - &right).norm() / left.norm().max(right.norm()).max(1.0)
}

/// 1. `D z² = (1 + q) z + c` coefficient-exact.
fn operator_exactness() -> Outcome {
    let mut rng = seeded(101);
    let z2 = parse_expr("z^2").unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let d = hahn_diff(&z2, &p);
        ensure(d.is_polynomial(), || format!("D z^2 has poles for {p:?}"))?;
        let want = Poly::new(vec![p.c(), c(1.0) + p.q()]);
        worst = worst.max(coeff_err(d.num(), &want));
    }
    ensure(worst <= 1e-12, || format!("max coefficient error {worst:e}"))?;
    Ok(format!("max coefficient error {worst:.1e}"))
}

/// 2. Repeated application against the closed-form expansion.
fn iterate_equivalence() -> Outcome {
    let mut rng = seeded(202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = random_ratfun(&mut rng, 5, 5);
        let p = random_params(&mut rng);
        for k in 2..=4 {
            let a = hahn_iter(&g, k, &p).map_err(|e| e.to_string())?;
            let b = hahn_expand(&g, k, &p).map_err(|e| e.to_string())?;
            let gap = cross_gap(&a, &b);
            worst = worst.max(gap);
            ensure(gap <= 1e-10, || format!("k = {k}, g = {g}: discrepancy {gap:e}"))?;
        }
    }
    // the normalization factor matters: dropping q^{k(k-1)/2} breaks k = 2
    let p = HahnParams::real(0.5, 1.0).unwrap();
    let g = parse_expr("z^3 + 1/(z-2)").unwrap();
    let without = hahn_expand(&g, 2, &p).unwrap().scale(p.q());
    ensure(hahn_iter(&g, 2, &p).unwrap().discrepancy(&without) > 1e-3, || {
        "expansion without the q-power also matches".into()
    })?;
    Ok(format!("150 identities, max discrepancy {worst:.1e}"))
}

/// 3. `D(fg) = f(σz) Dg + g Df` and `D(αf + βg) = α Df + β Dg`.
fn product_and_linearity() -> Outcome {
    let mut rng = seeded(303);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_ratfun(&mut rng, 3, 3);
        let g = random_ratfun(&mut rng, 3, 3);
        let p = random_params(&mut rng);
        let (alpha, beta) = (random_complex(&mut rng, 2.0), random_complex(&mut rng, 2.0));
        let fs = f.compose_affine(p.q(), p.c()).map_err(|e| e.to_string())?;
        let lhs = hahn_diff(&f.mul(&g), &p);
        let rhs = fs.mul(&hahn_diff(&g, &p)).add(&g.mul(&hahn_diff(&f, &p)));
        let gap = lhs.discrepancy(&rhs);
        worst = worst.max(gap);
        ensure(gap <= 1e-10, || format!("product rule gap {gap:e} for f = {f}, g = {g}"))?;
        let lhs = hahn_diff(&f.scale(alpha).add(&g.scale(beta)), &p);
        let rhs = hahn_diff(&f, &p).scale(alpha).add(&hahn_diff(&g, &p).scale(beta));
        let gap = lhs.discrepancy(&rhs);
        worst = worst.max(gap);
        ensure(gap <= 1e-10, || format!("linearity gap {gap:e} for f = {f}, g = {g}"))?;
    }
    Ok(format!("200 identities, max discrepancy {worst:.1e}"))
}

/// 4. Diagonal series action against the rational operator.
fn series_cross_check() -> Outcome {
    let mut rng = seeded(404);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = random_polynomial_fn(&mut rng, 6);
        let p = random_params(&mut rng);
        let s = PowerSeries::from_ratfun(&g, p.z0(), 6).map_err(|e| e.to_string())?;
        let ds = series_hahn(&s, &p).map_err(|e| e.to_string())?;
        let dg = hahn_diff(&g, &p);
        let z = p.z0() + random_complex(&mut rng, 1.5);
        let want = dg.eval(z).finite().ok_or("pole of a polynomial derivative")?;
        let rel = (ds.eval(z) - want).norm() / want.norm().max(1e-300);
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("relative error {rel:e} for g = {g}"))?;
    }
    Ok(format!("20 points, max relative error {worst:.1e}"))
}

/// 5. `T(r, 1/(g - a)) - T(r, g)` stays bounded on `[1, 2^20]`.
fn first_fundamental() -> Outcome {
    let mut rng = seeded(505);
    let grid = Grid::default();
    let opts = NevOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = random_ratfun(&mut rng, 5, 5);
        let a = random_complex(&mut rng, 2.0);
        let p = random_params(&mut rng);
        let h = g.sub(&RatFun::constant(a)).recip().map_err(|e| e.to_string())?;
        let tg = NevTable::build(&g, &[], &p, &grid, &opts).map_err(|e| e.to_string())?;
        let th = NevTable::build(&h, &[], &p, &grid, &opts).map_err(|e| e.to_string())?;
        let gap = tg
            .rows
            .iter()
            .zip(&th.rows)
            .map(|(x, y)| (x.t - y.t).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
        ensure(gap <= 2.0, || format!("sup gap {gap:.3} for g = {g}, a = {a}"))?;
    }
    Ok(format!("20 pairs, max sup gap {worst:.3}"))
}

fn suite_params() -> HahnParams {
    HahnParams::real(0.5, 0.3).unwrap()
}

/// 6. `m(r, D^k g / g) / T(r, g)` small and nonincreasing at the top.
fn lodl() -> Outcome {
    let grid = Grid::default();
    let opts = NevOptions::default();
    let p = suite_params();
    let mut worst: f64 = 0.0;
    for (name, g) in regression_suite() {
        for k in 1..=3 {
            let rep = check_lodl(&g, &p, k, &grid, &opts).map_err(|e| format!("{name}: {e}"))?;
            let top = rep.rows.last().unwrap().aux["ratio"];
            worst = worst.max(top);
            ensure(rep.verdict.passed(), || format!("{name}, k = {k} fails (top ratio {top:e})"))?;
        }
    }
    Ok(format!("60 checks, max top ratio {worst:.2e}"))
}

/// 7. Second main theorem slack on the suite.
fn smt() -> Outcome {
    let grid = Grid::default();
    let opts = NevOptions::default();
    let p = suite_params();
    let base = [Target::finite(0.0, 0.0), Target::finite(1.0, 0.0), Target::Infinity];
    let mut cases: Vec<(String, RatFun, Vec<Target>)> = regression_suite()
        .into_iter()
        .map(|(n, g)| (n.to_string(), g, base.to_vec()))
        .collect();
    cases.push((
        "z + 1/z".into(),
        parse_expr("z + 1/z").unwrap(),
        vec![Target::finite(2.0, 0.0), Target::finite(-2.0, 0.0), Target::Infinity],
    ));
    let mut least = f64::INFINITY;
    for (name, g, targets) in &cases {
        let rep = check_smt(g, targets, &p, &grid, &opts, None).map_err(|e| format!("{name}: {e}"))?;
        let min = rep.rows.iter().filter(|r| r.asserted).map(|r| r.slack).fold(f64::INFINITY, f64::min);
        least = least.min(min);
        ensure(rep.verdict.passed(), || format!("{name}: min slack {min:.3}"))?;
    }
    Ok(format!("{} checks, min asserted slack {least:.3}", cases.len()))
}

/// 8. Defect relation proxies on the suite.
fn defects() -> Outcome {
    let grid = Grid::default();
    let opts = NevOptions::default();
    let p = suite_params();
    let targets = [Target::finite(0.0, 0.0), Target::finite(1.0, 0.0), Target::Infinity];
    let mut max_total: f64 = 0.0;
    for (name, g) in regression_suite() {
        let rep = check_defect_sum(&g, &targets, &p, &grid, &opts).map_err(|e| format!("{name}: {e}"))?;
        let total = rep.rows.last().unwrap().lhs;
        max_total = max_total.max(total);
        ensure(rep.verdict.passed(), || format!("{name}: sum Theta {total:.3}"))?;
    }
    Ok(format!("20 checks, max sum Theta {max_total:.3}"))
}

/// 9. Reduced counting of the double zero of `z²`.
fn hahn_counting() -> Outcome {
    let z2 = parse_expr("z^2").unwrap();
    let zero = Target::finite(0.0, 0.0);
    let n0 = nhat_counting(&z2, 1.0, zero, &HahnParams::real(0.5, 0.0).unwrap()).map_err(|e| e.to_string())?;
    let n1 = nhat_counting(&z2, 1.0, zero, &HahnParams::real(0.5, 1.0).unwrap()).map_err(|e| e.to_string())?;
    ensure(n0 == 1 && n1 == 2, || format!("got {n0} (c = 0) and {n1} (c = 1)"))?;
    Ok("n-hat = 1 (c = 0), 2 (c = 1)".into())
}

/// 10. Logarithmic order from synthetic and q-Pochhammer rows.
fn log_order() -> Outcome {
    let grid = Grid::default();
    let rows: Vec<(f64, f64)> = grid.radii().iter().map(|&r| (r, r.ln().powi(2))).collect();
    let a = order_estimators(&rows).map_err(|e| e.to_string())?.rho_log;
    ensure((1.9..=2.1).contains(&a), || format!("synthetic rho_log {a}"))?;
    let top = pochhammer_zero_counting(0.5, 2f64.powi(20)).unwrap();
    ensure((top - 210.0 * 2f64.ln()).abs() < 1e-9, || format!("N(2^20) = {top}"))?;
    let rows: Vec<(f64, f64)> = grid
        .radii()
        .iter()
        .map(|&r| (r, pochhammer_zero_counting(0.5, r).unwrap()))
        .collect();
    let b = order_estimators(&rows).map_err(|e| e.to_string())?.rho_log;
    ensure((1.8..=2.2).contains(&b), || format!("q-Pochhammer rho_log {b}"))?;
    Ok(format!("rho_log {a:.4} (synthetic), {b:.4} (q-Pochhammer)"))
}

/// 11. No nonconstant solution of the Fermat-type equation in the sweep.
fn fermat_sweep() -> Outcome {
    let mut rng = seeded(1111);
    let mut least = f64::INFINITY;
    for i in 0..500 {
        let f = random_ratfun(&mut rng, 4, 4);
        let p = random_params(&mut rng);
        let rep = check_fermat(&f, &p).map_err(|e| format!("case {i}: {e}"))?;
        let row = &rep.rows[0];
        least = least.min(row.lhs / (row.rhs / 1e-9));
        ensure(rep.verdict.passed(), || format!("zero residual for f = {f}, {p:?}"))?;
    }
    Ok(format!("500 cases, min relative residual {least:.2e}"))
}

fn shared_targets(rep: &hahn_core::CheckReport, targets: &[Target], bound: f64) -> Vec<Target> {
    targets
        .iter()
        .filter(|a| {
            let label = format!("a = {a}");
            rep.rows
                .iter()
                .filter(|r| r.label.as_deref() == Some(label.as_str()))
                .all(|r| r.lhs <= bound)
        })
        .copied()
        .collect()
}

/// 12. Five shared values force equality.
fn five_values() -> Outcome {
    let grid = Grid::default();
    let opts = NevOptions::default();
    let p = suite_params();
    let targets = vec![
        Target::finite(0.0, 0.0),
        Target::finite(1.0, 0.0),
        Target::finite(2.0, 0.0),
        Target::finite(3.0, 0.0),
        Target::Infinity,
    ];
    let mut rng = seeded(1212);
    let mut fns = vec![parse_expr("z + 1/z").unwrap()];
    fns.extend((0..4).map(|_| random_ratfun(&mut rng, 4, 3)));
    for g in &fns {
        let rep = compare_sharing(g, g, &targets, &p, &grid, &opts, 0).map_err(|e| e.to_string())?;
        let eq = rep.rows.last().unwrap();
        ensure(rep.outcome.as_deref() == Some("5/5 shared"), || format!("{g}: {:?}", rep.outcome))?;
        ensure(eq.asserted && eq.ok && rep.verdict.passed(), || format!("{g}: g == h not asserted"))?;
    }
    let rep = compare_sharing(
        &parse_expr("z").unwrap(),
        &parse_expr("2*z").unwrap(),
        &targets,
        &p,
        &grid,
        &opts,
        0,
    )
    .map_err(|e| e.to_string())?;
    let shared = shared_targets(&rep, &targets, 0.0);
    ensure(shared == vec![Target::finite(0.0, 0.0), Target::Infinity], || {
        format!("(z, 2z) shares {shared:?}")
    })?;
    ensure(!rep.rows.last().unwrap().asserted, || "identity asserted for (z, 2z)".into())?;
    Ok("identical pairs 5/5 with g == h; (z, 2z) shares {0, inf}".into())
}

/// 13. q-exponential by the series solver.
fn heq() -> Outcome {
    let p = HahnParams::real(0.5, 1.0).unwrap();
    let a0 = PowerSeries::constant(p.z0(), c(-1.0), 40);
    let g = heq_solve(std::slice::from_ref(&a0), &[c(1.0)], 40, &p).map_err(|e| e.to_string())?;
    let want = [1.0, 1.0, 2.0 / 3.0, 8.0 / 21.0];
    for (n, w) in want.iter().enumerate() {
        let err = (g.coeff(n) - c(*w)).norm();
        ensure(err <= 1e-12, || format!("a_{n} off by {err:e}"))?;
    }
    let z = p.z0() + c(0.1);
    let res = heq_residual(&[a0], Candidate::Series(&g), &[z], &p).map_err(|e| e.to_string())?;
    let r = res[0].finite().ok_or("pole marker for a series")?.norm();
    ensure(r < 1e-8, || format!("residual {r:e}"))?;
    Ok(format!("coefficients exact, residual {r:.1e} at w = 0.1"))
}

/// 14. Grammar examples round-trip; malformed input reports positions.
fn parser() -> Outcome {
    let good = [
        "(z^2+1)/(z-2)",
        "1/z + z",
        "2i*z - 1",
        "-z^2 + 3*z^-2",
        "(1+2i)*z^3 - 0.25*z + 1e-3",
        "((z-1)^2*(z+2))/(z^2+4)",
    ];
    for s in good {
        let g = parse_expr(s).map_err(|e| format!("{s}: {e}"))?;
        let text = format_expr(&g, 15);
        let back = parse_expr(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(g.discrepancy(&back) <= 1e-13, || format!("{s} -> {text} drifts"))?;
    }
    let z2 = parse_expr("2*z^2").unwrap();
    ensure(z2.num() == &Poly::from_real(&[0.0, 0.0, 2.0]), || "2*z^2 precedence".into())?;
    let neg = parse_expr("-z^2").unwrap();
    ensure(neg.num() == &Poly::from_real(&[0.0, 0.0, -1.0]), || "-z^2 precedence".into())?;
    let bad: [(&str, usize, bool); 5] = [
        ("z^z", 2, false),
        ("1/(z-z)", 1, true),
        ("(z+1", 4, false),
        ("z+1)", 3, false),
        ("2*/z", 2, false),
    ];
    for (s, offset, semantic) in bad {
        let e = match parse_expr(s) {
            Ok(g) => return Err(format!("{s} accepted as {g}")),
            Err(e) => e,
        };
        ensure(e.offset == offset, || format!("{s}: offset {} not {offset}", e.offset))?;
        ensure(matches!(e.kind, ParseErrorKind::Semantic(_)) == semantic, || format!("{s}: kind {:?}", e.kind))?;
    }
    Ok(format!("{} round-trips, {} rejections", good.len(), bad.len()))
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "operator exactness", limit: secs(1), run: operator_exactness },
        Criterion { id: 2, title: "iterate equivalence", limit: secs(10), run: iterate_equivalence },
        Criterion { id: 3, title: "product rule and linearity", limit: secs(5), run: product_and_linearity },
        Criterion { id: 4, title: "series/rational cross-check", limit: secs(1), run: series_cross_check },
        Criterion { id: 5, title: "first fundamental theorem", limit: secs(60), run: first_fundamental },
        Criterion { id: 6, title: "logarithmic derivative lemma", limit: secs(120), run: lodl },
        Criterion { id: 7, title: "second main theorem slack", limit: secs(120), run: smt },
        Criterion { id: 8, title: "defect relation", limit: secs(60), run: defects },
        Criterion { id: 9, title: "Hahn counting exactness", limit: secs(1), run: hahn_counting },
        Criterion { id: 10, title: "logarithmic order estimator", limit: secs(5), run: log_order },
        Criterion { id: 11, title: "Fermat-type sweep", limit: secs(60), run: fermat_sweep },
        Criterion { id: 12, title: "five-value comparator", limit: secs(5), run: five_values },
        Criterion { id: 13, title: "heq solver", limit: secs(1), run: heq },
        Criterion { id: 14, title: "parser", limit: secs(1), run: parser },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for cr in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(cr.run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > cr.limit => Err(format!(
                "{detail}; took {:.2} s, limit {} s",
                elapsed.as_secs_f64(),
                cr.limit.as_secs()
            )),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if result.is_err() {
            failed += 1;
        }
        println!(
            "{tag} {:>2}. {:<30} {:>7.2} s  {detail}",
            cr.id,
            cr.title,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
