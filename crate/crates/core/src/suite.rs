//! A fixed regression suite of rational functions and seeded random inputs.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cpoly::{Poly, DEFAULT_CLUSTER_TOL};
use crate::parse::parse_expr;
use crate::qcore::HahnParams;
use crate::ratfun::RatFun;

/// Expression texts of the regression suite; every zero and pole has
/// modulus at most 3.
pub const REGRESSION_SUITE: [&str; 20] = [
    "z",
    "z^2",
    "z + 1/z",
    "1/(z-1)",
    "(z^2+1)/(z-2)",
    "z^3 - 2*z + 1",
    "(z-1)^2*(z+2)",
    "1/((z-1)*(z+2)^2)",
    "(z^2-1)/(z^2+4)",
    "(2*z+1)/(z^2+z+1)",
    "z^4 + 1",
    "(z^3+1)/(z^2-3*z+2)",
    "(1+i)*z^2 - i",
    "(z-0.5i)/(z+1.5)",
    "(z^5-1)/z^2",
    "(z^2+2)/(z^3-1)",
    "z/(z^2-z+2)",
    "(3*z^2-1)/(z^4+2)",
    "(z+2)^3/(z-1)",
    "(z^2-2i*z)/(z^2+1.5)",
];

pub fn regression_suite() -> Vec<(&'static str, RatFun)> {
    REGRESSION_SUITE
        .iter()
        .map(|s| (*s, parse_expr(s).expect("suite expressions parse")))
        .collect()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the box `[-h, h]²`.
pub fn random_complex<R: Rng>(rng: &mut R, h: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-h..=h), rng.gen_range(-h..=h))
}

/// `(q, c)` with `0.2 ≤ |q| ≤ 0.9`, uniform argument, `c` in `[-2, 2]²`.
pub fn random_params<R: Rng>(rng: &mut R) -> HahnParams {
    let q = Complex64::from_polar(
        rng.gen_range(0.2..=0.9),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    );
    HahnParams::new(q, random_complex(rng, 2.0)).expect("|q| in [0.2, 0.9]")
}

/// Exactly degree `deg` with coefficients in `[-2, 2]²`.
pub fn random_poly<R: Rng>(rng: &mut R, deg: usize) -> Poly {
    loop {
        let p = Poly::new((0..=deg).map(|_| random_complex(rng, 2.0)).collect());
        if p.degree() == Some(deg) {
            return p;
        }
    }
}

/// Nonconstant `P/Q` with `deg P ≤ max_num`, `deg Q ≤ max_den`, both degrees
/// drawn uniformly.
pub fn random_ratfun<R: Rng>(rng: &mut R, max_num: usize, max_den: usize) -> RatFun {
    loop {
        let (dn, dd) = (rng.gen_range(0..=max_num), rng.gen_range(0..=max_den));
        let num = random_poly(rng, dn);
        let den = random_poly(rng, dd);
        if let Ok(g) = RatFun::normalize(num, den, DEFAULT_CLUSTER_TOL) {
            if !g.is_constant() {
                return g;
            }
        }
    }
}

/// Nonconstant polynomial of degree drawn from `1..=max_deg`.
pub fn random_polynomial_fn<R: Rng>(rng: &mut R, max_deg: usize) -> RatFun {
    let deg = rng.gen_range(1..=max_deg.max(1));
    RatFun::from_poly(random_poly(rng, deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::Target;

    #[test]
    fn suite_is_well_formed() {
        let suite = regression_suite();
        assert_eq!(suite.len(), 20);
        for (name, g) in &suite {
            assert!(!g.is_constant(), "{name}");
            let mut pts = g.a_points(Target::Infinity).unwrap();
            pts.extend(g.a_points(Target::finite(0.0, 0.0)).unwrap());
            assert!(pts.iter().all(|p| p.location.norm() <= 3.0 + 1e-9), "{name}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_ratfun(&mut seeded(7), 4, 3);
        let b = random_ratfun(&mut seeded(7), 4, 3);
        assert_eq!(a.num(), b.num());
        assert_eq!(a.den(), b.den());
        let p = random_params(&mut seeded(1));
        assert!(p.is_theorem_valid());
    }
}
