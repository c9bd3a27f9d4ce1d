//! Randomised checks of the exact difference identities and of the
//! integral identities that hold up to quadrature error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{
    centered_remainder, factorial, forward_difference, mean_value_identity_check,
    taylor_integral_identity_check, taylor_remainder, MultiIndex, TestFunction,
};
use crate::convex_body::{BodyKind, ConvexBody};
use crate::error::Result;
use crate::integrate::{sphere_body_identity_check, IntegrationPlan};

pub const ALGEBRAIC_TOL: f64 = 1e-12;
pub const QUADRATURE_TOL: f64 = 1e-7;
pub const SPHERE_TOL: f64 = 1e-3;
/// Gauss–Legendre nodes per cube axis for the integral identities.
pub const QUADRATURE_NODES: usize = 32;

type DifferenceOp = fn(&TestFunction, &[f64], &[f64], usize) -> Result<f64>;

/// The difference operators under test; swapped out by negative controls.
#[derive(Debug, Clone, Copy)]
pub struct Ops {
    /// `R^m f(x, y)`.
    pub centered: DifferenceOp,
    /// `Δ_h^m f(x)`.
    pub forward: DifferenceOp,
}

impl Default for Ops {
    fn default() -> Self {
        Self {
            centered: centered_remainder,
            forward: forward_difference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &'static str, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        let finite = residuals.iter().all(|r| r.is_finite());
        Self {
            name,
            cases: residuals.len(),
            max_residual,
            tolerance,
            passed: finite && max_residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub quick: bool,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const SMOOTH: [&str; 4] = ["gaussian", "sine_bump", "exp_bump", "poly_bump"];

fn uniform(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> Result<TestFunction> {
    let monomials: Vec<(f64, Vec<u32>)> = MultiIndex::up_to_order(dim, degree)
        .iter()
        .map(|a| {
            (
                rng.random_range(-1.0..1.0),
                a.entries().iter().map(|&e| e as u32).collect(),
            )
        })
        .collect();
    TestFunction::polynomial(dim, &monomials)
}

/// `max |R^m f(x, x+mh) − (−1)^m Δ_h^m f(x)|` over random cases.
fn duality(rng: &mut ChaCha8Rng, cases: usize, ops: &Ops) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let name = SMOOTH[rng.random_range(0..SMOOTH.len())];
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let f = TestFunction::by_name(name, n)?;
        let x = uniform(rng, n, 1.5);
        let h = uniform(rng, n, 0.5);
        let y: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + m as f64 * b).collect();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        out.push(((ops.centered)(&f, &x, &y, m)? - sign * (ops.forward)(&f, &x, &h, m)?).abs());
    }
    Ok(out)
}

/// `|Δ_h^m p(x)|` for random polynomials of degree `m − 1`.
fn annihilation(rng: &mut ChaCha8Rng, cases: usize, ops: &Ops) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let poly = random_polynomial(rng, n, m - 1)?;
        let x = uniform(rng, n, 1.0);
        let h = uniform(rng, n, 0.25);
        out.push((ops.forward)(&poly, &x, &h, m)?.abs());
    }
    Ok(out)
}

/// `|Δ_h^m x^m − m! h^m|` in one dimension.
fn monomial_power(rng: &mut ChaCha8Rng, cases: usize, ops: &Ops) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let m = rng.random_range(1..=4);
        let f = TestFunction::polynomial(1, &[(1.0, vec![m as u32])])?;
        let x = uniform(rng, 1, 1.0);
        let h = uniform(rng, 1, 1.0);
        let exact = factorial(m) * h[0].powi(m as i32);
        out.push(((ops.forward)(&f, &x, &h, m)? - exact).abs());
    }
    Ok(out)
}

/// `|R_{m−1} p(x, y)|` for random polynomials of degree `m − 1`.
fn taylor_exactness(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let poly = random_polynomial(rng, n, m - 1)?;
        let x = uniform(rng, n, 1.0);
        let y = uniform(rng, n, 1.0);
        out.push(taylor_remainder(&poly, &x, &y, m)?.abs());
    }
    Ok(out)
}

type QuadratureCheck = fn(&TestFunction, &[f64], &[f64], usize, usize) -> Result<f64>;

fn quadrature_identity(
    rng: &mut ChaCha8Rng,
    cases: usize,
    max_dim: usize,
    check: QuadratureCheck,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cases);
    for i in 0..cases {
        let name = ["gaussian", "sine_bump"][i % 2];
        let n = rng.random_range(1..=max_dim);
        let m = rng.random_range(1..=3);
        let f = TestFunction::by_name(name, n)?;
        let x = uniform(rng, n, 1.0);
        let h = uniform(rng, n, 0.5);
        out.push(check(&f, &x, &h, m, QUADRATURE_NODES)?);
    }
    Ok(out)
}

/// Sphere-to-body identity on three homogeneous integrands.
fn sphere_body() -> Result<Vec<f64>> {
    let interval = ConvexBody::new(BodyKind::Box {
        half_widths: vec![1.0],
    })?;
    let disc = ConvexBody::unit_ball(2);
    let ellipse = ConvexBody::new(BodyKind::Ellipsoid {
        semi_axes: vec![2.0, 1.0],
    })?;
    let plan = IntegrationPlan::quadrature(32);
    Ok(vec![
        sphere_body_identity_check(|s| s[0], &interval, 1, 2.0, &plan)?.rel_gap,
        sphere_body_identity_check(|s| s[0], &disc, 1, 2.0, &plan)?.rel_gap,
        sphere_body_identity_check(|s| s[0] * s[1], &ellipse, 2, 2.0, &plan)?.rel_gap,
    ])
}

/// Runs the full suite (1000 random cases per exact identity) or, with
/// `quick`, a 100-case subset with the quadrature identities in `N ≤ 2`.
pub fn run_suite(seed: u64, quick: bool, ops: &Ops) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (exact_cases, quad_cases, quad_dim) = if quick { (100, 20, 2) } else { (1000, 120, 3) };
    let checks = vec![
        IdentityCheck::new("duality", &duality(&mut rng, exact_cases, ops)?, ALGEBRAIC_TOL),
        IdentityCheck::new(
            "annihilation",
            &annihilation(&mut rng, exact_cases, ops)?,
            ALGEBRAIC_TOL,
        ),
        IdentityCheck::new(
            "monomial_power",
            &monomial_power(&mut rng, exact_cases, ops)?,
            ALGEBRAIC_TOL,
        ),
        IdentityCheck::new(
            "taylor_exactness",
            &taylor_exactness(&mut rng, exact_cases)?,
            ALGEBRAIC_TOL,
        ),
        IdentityCheck::new(
            "mean_value",
            &quadrature_identity(&mut rng, quad_cases, quad_dim, mean_value_identity_check)?,
            QUADRATURE_TOL,
        ),
        IdentityCheck::new(
            "taylor_integral",
            &quadrature_identity(&mut rng, quad_cases, quad_dim, taylor_integral_identity_check)?,
            QUADRATURE_TOL,
        ),
        IdentityCheck::new("sphere_body", &sphere_body()?, SPHERE_TOL),
    ];
    Ok(IdentityReport {
        seed,
        quick,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flipped_forward(f: &TestFunction, x: &[f64], h: &[f64], m: usize) -> Result<f64> {
        // the j = 1 binomial enters with the wrong sign
        let base = forward_difference(f, x, h, m)?;
        let x1: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + b).collect();
        let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(base - 2.0 * sign * m as f64 * f.eval(&x1))
    }

    #[test]
    fn quick_suite_passes() {
        let r = run_suite(1, true, &Ops::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn corrupted_sign_fails() {
        let ops = Ops {
            forward: flipped_forward,
            ..Ops::default()
        };
        let r = run_suite(1, true, &ops).unwrap();
        assert!(!r.all_passed());
        assert!(!r.check("duality").unwrap().passed);
    }
}
