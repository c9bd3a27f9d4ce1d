//! Multi-index calculus on test functions with exact derivatives.
//!
//! Test functions are finite sums of separable products,
//! `f(x) = Σ_k c_k Π_i g_{k,i}(x_i)`, where every one-dimensional factor
//! knows all of its derivatives in closed form. Partial derivatives are then
//! exact: `∂^α f(x) = Σ_k c_k Π_i g_{k,i}^{(α_i)}(x_i)`.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::{composite, tensor, GaussLegendre};

/// Highest derivative order any registered function provides.
pub const MAX_ORDER: usize = 8;

/// Largest dimension supported by multi-index enumeration.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self { entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn order(&self) -> usize {
        self.entries.iter().sum()
    }

    /// `α! = Π α_i!`.
    pub fn factorial(&self) -> f64 {
        self.entries.iter().map(|&a| factorial(a)).product()
    }

    /// `|α|! / α!`, the number of ordered index tuples collapsing onto `α`.
    pub fn multinomial(&self) -> f64 {
        factorial(self.order()) / self.factorial()
    }

    /// `y^α = Π y_i^{α_i}`.
    pub fn monomial(&self, y: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(y)
            .map(|(&a, &v)| v.powi(a as i32))
            .product()
    }

    /// All multi-indices of order exactly `m` in lexicographic order.
    pub fn of_order(dim: usize, m: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0; dim];
        fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            let dim = cur.len();
            if pos + 1 == dim {
                cur[pos] = left;
                out.push(MultiIndex::new(cur.clone()));
                return;
            }
            for a in 0..=left {
                cur[pos] = a;
                rec(pos + 1, left - a, cur, out);
            }
        }
        if dim == 0 {
            return out;
        }
        rec(0, m, &mut cur, &mut out);
        out
    }

    /// All multi-indices with `|α| ≤ m`, grouped by increasing order.
    pub fn up_to_order(dim: usize, m: usize) -> Vec<MultiIndex> {
        (0..=m).flat_map(|k| Self::of_order(dim, k)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// A one-dimensional factor with closed-form derivatives of every order.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    One,
    Monomial(u32),
    /// `exp(−a x²)`.
    Gaussian(f64),
    /// `sin(ω x + φ)`.
    Sine { freq: f64, phase: f64 },
    /// `exp(c x)`.
    Exp(f64),
    /// Smooth cutoff: `1` on `|x| ≤ flat`, `0` on `|x| ≥ outer`.
    Plateau { flat: f64, outer: f64 },
    Product(Vec<Factor>),
}

impl Factor {
    /// `[g(x), g'(x), …, g^{(n)}(x)]`.
    pub fn derivatives(&self, x: f64, n: usize) -> Vec<f64> {
        match self {
            Factor::One => {
                let mut d = vec![0.0; n + 1];
                d[0] = 1.0;
                d
            }
            Factor::Monomial(k) => (0..=n)
                .map(|j| {
                    let k = *k as usize;
                    if j > k {
                        0.0
                    } else {
                        factorial(k) / factorial(k - j) * x.powi((k - j) as i32)
                    }
                })
                .collect(),
            Factor::Gaussian(a) => {
                let mut d = Vec::with_capacity(n + 1);
                d.push((-a * x * x).exp());
                if n >= 1 {
                    d.push(-2.0 * a * x * d[0]);
                }
                for j in 1..n {
                    let next = -2.0 * a * (x * d[j] + j as f64 * d[j - 1]);
                    d.push(next);
                }
                d
            }
            Factor::Sine { freq, phase } => (0..=n)
                .map(|j| {
                    freq.powi(j as i32)
                        * (freq * x + phase + j as f64 * std::f64::consts::FRAC_PI_2).sin()
                })
                .collect(),
            Factor::Exp(c) => {
                let e = (c * x).exp();
                (0..=n).map(|j| c.powi(j as i32) * e).collect()
            }
            Factor::Plateau { flat, outer } => plateau_derivatives(x, *flat, *outer, n),
            Factor::Product(parts) => {
                let mut acc = Factor::One.derivatives(x, n);
                for part in parts {
                    let d = part.derivatives(x, n);
                    acc = leibniz(&acc, &d);
                }
                acc
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Factor::One => 1.0,
            Factor::Monomial(k) => x.powi(*k as i32),
            Factor::Gaussian(a) => (-a * x * x).exp(),
            Factor::Sine { freq, phase } => (freq * x + phase).sin(),
            Factor::Exp(c) => (c * x).exp(),
            Factor::Plateau { flat, outer } => plateau_derivatives(x, *flat, *outer, 0)[0],
            Factor::Product(parts) => parts.iter().map(|p| p.value(x)).product(),
        }
    }

    fn is_polynomial(&self) -> bool {
        match self {
            Factor::One | Factor::Monomial(_) => true,
            Factor::Product(parts) => parts.iter().all(Factor::is_polynomial),
            _ => false,
        }
    }

    /// Upper bound of `sup_{|x| ≤ r} |g^{(j)}(x)|` for `j = 0..=n`, from a
    /// fine grid plus a Lipschitz correction with the next derivative.
    fn sup_bounds(&self, r: f64, n: usize) -> Vec<f64> {
        let steps = 8000;
        let h = 2.0 * r / steps as f64;
        let mut sup = vec![0.0f64; n + 2];
        for k in 0..=steps {
            let x = -r + k as f64 * h;
            for (s, d) in sup.iter_mut().zip(self.derivatives(x, n + 1)) {
                *s = s.max(d.abs());
            }
        }
        (0..=n).map(|j| sup[j] + h * sup[j + 1]).collect()
    }
}

fn leibniz(f: &[f64], g: &[f64]) -> Vec<f64> {
    (0..f.len())
        .map(|j| (0..=j).map(|k| binomial(j, k) * f[k] * g[j - k]).sum())
        .collect()
}

/// Coefficients of `Q_j` with `ψ^{(j)}(u) = Q_j(1/u) e^{−1/u}`, `ψ(u) = e^{−1/u}`.
fn psi_polynomials(n: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![1.0]];
    for _ in 0..n {
        let q = polys.last().unwrap();
        // Q_{j+1}(s) = s² (Q_j(s) − Q_j'(s))
        let mut diff = q.clone();
        for (k, c) in q.iter().enumerate().skip(1) {
            diff[k - 1] -= k as f64 * c;
        }
        let mut next = vec![0.0, 0.0];
        next.extend(diff);
        polys.push(next);
    }
    polys
}

fn psi_derivatives(u: f64, n: usize) -> Vec<f64> {
    if u <= 0.0 {
        return vec![0.0; n + 1];
    }
    let s = 1.0 / u;
    let e = (-s).exp();
    if e == 0.0 {
        return vec![0.0; n + 1];
    }
    psi_polynomials(n)
        .iter()
        .map(|q| q.iter().rev().fold(0.0, |acc, c| acc * s + c) * e)
        .collect()
}

/// Derivatives of the smooth step `S(u) = ψ(u) / (ψ(u) + ψ(1−u))`.
fn smooth_step_derivatives(u: f64, n: usize) -> Vec<f64> {
    if u >= 1.0 {
        let mut d = vec![0.0; n + 1];
        d[0] = 1.0;
        return d;
    }
    if u <= 0.0 {
        return vec![0.0; n + 1];
    }
    let a = psi_derivatives(u, n);
    let b: Vec<f64> = psi_derivatives(1.0 - u, n)
        .into_iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 1 { -v } else { v })
        .collect();
    let den: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    // S·D = ψ, solved order by order.
    let mut s = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = a[j];
        for k in 0..j {
            acc -= binomial(j, k) * s[k] * den[j - k];
        }
        s.push(acc / den[0]);
    }
    s
}

fn plateau_derivatives(x: f64, flat: f64, outer: f64, n: usize) -> Vec<f64> {
    let width = outer - flat;
    let u = (outer - x.abs()) / width;
    let chain = -x.signum() / width;
    smooth_step_derivatives(u, n)
        .into_iter()
        .enumerate()
        .map(|(j, d)| if j == 0 { d } else { d * chain.powi(j as i32) })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// One factor per coordinate axis.
    pub factors: Vec<Factor>,
}

/// A test function with exact partial derivatives up to `smoothness_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    name: String,
    dim: usize,
    terms: Vec<Term>,
    support_radius: f64,
    tail_tolerance: f64,
    smoothness_order: usize,
    in_sobolev: bool,
}

/// Names accepted by [`TestFunction::by_name`].
pub const REGISTRY: &[&str] = &[
    "zero",
    "gaussian",
    "poly_bump",
    "sine_bump",
    "exp_bump",
    "square",
    "cube",
    "product_xy",
];

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        terms: Vec<Term>,
        support_radius: f64,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "test function dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        for t in &terms {
            if t.factors.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.factors.len(),
                });
            }
        }
        let in_sobolev = terms.iter().all(|t| !t.factors.iter().all(Factor::is_polynomial));
        Ok(Self {
            name: name.into(),
            dim,
            terms,
            support_radius,
            tail_tolerance: 1e-12,
            smoothness_order: MAX_ORDER,
            in_sobolev,
        })
    }

    /// Polynomial `Σ c_k x^{α_k}`; admitted for identity checks only, with
    /// an artificial support radius of 1.
    pub fn polynomial(dim: usize, monomials: &[(f64, Vec<u32>)]) -> Result<Self> {
        let terms = monomials
            .iter()
            .map(|(c, exps)| Term {
                coeff: *c,
                factors: exps.iter().map(|&e| Factor::Monomial(e)).collect(),
            })
            .collect();
        Self::new("polynomial", dim, terms, 1.0)
    }

    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        let ones = |d: usize| vec![Factor::One; d];
        let plateau = Factor::Plateau {
            flat: 0.5,
            outer: 2.0,
        };
        let with_plateau = |first: Factor| {
            let mut factors = vec![Factor::Product(vec![first, plateau.clone()])];
            factors.extend(std::iter::repeat_n(plateau.clone(), dim.saturating_sub(1)));
            factors
        };
        let mut f = match name {
            "zero" => Self::new(name, dim, Vec::new(), 1.0)?,
            "gaussian" => Self::new(
                name,
                dim,
                vec![Term {
                    coeff: 1.0,
                    factors: vec![Factor::Gaussian(1.0); dim],
                }],
                6.0,
            )?,
            "poly_bump" => {
                // (1 + x_1 − x_1²/2) Π plateau(x_i)
                let terms = [(1.0, 0), (1.0, 1), (-0.5, 2)]
                    .iter()
                    .map(|&(c, k)| Term {
                        coeff: c,
                        factors: with_plateau(Factor::Monomial(k)),
                    })
                    .collect();
                Self::new(name, dim, terms, 2.0)?
            }
            "sine_bump" => Self::new(
                name,
                dim,
                vec![Term {
                    coeff: 1.0,
                    factors: with_plateau(Factor::Sine {
                        freq: 2.0,
                        phase: 0.3,
                    }),
                }],
                2.0,
            )?,
            "exp_bump" => Self::new(
                name,
                dim,
                vec![Term {
                    coeff: 1.0,
                    factors: with_plateau(Factor::Exp(1.0)),
                }],
                2.0,
            )?,
            "square" | "cube" => {
                let k = if name == "square" { 2 } else { 3 };
                let mut factors = ones(dim);
                factors[0] = Factor::Monomial(k);
                Self::new(name, dim, vec![Term { coeff: 1.0, factors }], 1.0)?
            }
            "product_xy" => {
                if dim < 2 {
                    return Err(Error::InvalidParameter(
                        "product_xy needs dimension >= 2".into(),
                    ));
                }
                let mut factors = ones(dim);
                factors[0] = Factor::Monomial(1);
                factors[1] = Factor::Monomial(1);
                Self::new(name, dim, vec![Term { coeff: 1.0, factors }], 1.0)?
            }
            other => return Err(Error::UnknownFunction(other.to_string())),
        };
        f.name = name.to_string();
        Ok(f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn smoothness_order(&self) -> usize {
        self.smoothness_order
    }

    /// False for polynomials, which are not in any `W^{m,p}(R^N)`.
    pub fn in_sobolev(&self) -> bool {
        self.in_sobolev
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.factors
                        .iter()
                        .zip(x)
                        .map(|(g, &v)| g.value(v))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_order(alpha.order())?;
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.factors
                        .iter()
                        .zip(x)
                        .zip(alpha.entries())
                        .map(|((g, &v), &a)| g.derivatives(v, a)[a])
                        .product::<f64>()
            })
            .sum())
    }

    /// `∂^α f(x)` for every `α` in `indices`; all indices must have order ≤ `m`.
    pub fn partials(&self, indices: &[MultiIndex], m: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; indices.len()];
        for t in &self.terms {
            let axis: Vec<Vec<f64>> = t
                .factors
                .iter()
                .zip(x)
                .map(|(g, &v)| g.derivatives(v, m))
                .collect();
            for (o, a) in out.iter_mut().zip(indices) {
                *o += t.coeff
                    * a.entries()
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| axis[i][k])
                        .product::<f64>();
            }
        }
        out
    }

    /// `D^m f(x)(y, …, y)` without argument checks.
    pub(crate) fn m_form(&self, x: &[f64], y: &[f64], m: usize) -> f64 {
        let indices = MultiIndex::of_order(self.dim, m);
        let parts = self.partials(&indices, m, x);
        indices
            .iter()
            .zip(parts)
            .map(|(a, d)| a.multinomial() * a.monomial(y) * d)
            .sum()
    }

    /// Upper bound of `sup_{|x_i| ≤ r} |∂^α f(x)|` for every `|α| = m`,
    /// lexicographic order.
    pub fn partial_sup_bounds(&self, m: usize, r: f64) -> Vec<f64> {
        let indices = MultiIndex::of_order(self.dim, m);
        let mut out = vec![0.0; indices.len()];
        for t in &self.terms {
            let sups: Vec<Vec<f64>> = t.factors.iter().map(|g| g.sup_bounds(r, m)).collect();
            for (o, a) in out.iter_mut().zip(&indices) {
                *o += t.coeff.abs()
                    * a.entries()
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| sups[i][k])
                        .product::<f64>();
            }
        }
        out
    }

    /// Bound on `sup_x sup_{|σ|=1} |D^m f(x)(σ, …, σ)|` over the cube of
    /// half-width `r`, via Cauchy–Schwarz against `Σ_α (m!/α!) σ^{2α} = 1`.
    pub fn m_form_bound(&self, m: usize, r: f64) -> f64 {
        let indices = MultiIndex::of_order(self.dim, m);
        self.partial_sup_bounds(m, r)
            .iter()
            .zip(&indices)
            .map(|(s, a)| a.multinomial() * s * s)
            .sum::<f64>()
            .sqrt()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.smoothness_order {
            return Err(Error::OrderTooLarge {
                function: self.name.clone(),
                requested: order,
                available: self.smoothness_order,
            });
        }
        Ok(())
    }
}

/// `D^m f(x)(y, …, y) = Σ_{|α|=m} (m!/α!) y^α ∂^α f(x)`.
pub fn directional_m_form(f: &TestFunction, x: &[f64], y: &[f64], m: usize) -> Result<f64> {
    f.check_point(x)?;
    f.check_point(y)?;
    f.check_order(m)?;
    Ok(f.m_form(x, y, m))
}

/// `Δ_h^m f(x) = Σ_j (−1)^{m+j} C(m,j) f(x + j h)`.
pub fn forward_difference(f: &TestFunction, x: &[f64], h: &[f64], m: usize) -> Result<f64> {
    f.check_point(x)?;
    f.check_point(h)?;
    if m == 0 {
        return Err(Error::InvalidParameter("difference order must be >= 1".into()));
    }
    let mut pt = vec![0.0; x.len()];
    Ok((0..=m)
        .map(|j| {
            for ((p, &a), &b) in pt.iter_mut().zip(x).zip(h) {
                *p = a + j as f64 * b;
            }
            let sign = if (m + j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(m, j) * f.eval(&pt)
        })
        .sum())
}

/// `R^m f(x, y) = Σ_j (−1)^j C(m,j) f((m−j)/m · x + j/m · y)`.
pub fn centered_remainder(f: &TestFunction, x: &[f64], y: &[f64], m: usize) -> Result<f64> {
    f.check_point(x)?;
    f.check_point(y)?;
    if m == 0 {
        return Err(Error::InvalidParameter("remainder order must be >= 1".into()));
    }
    Ok(centered_remainder_unchecked(f, x, y, m))
}

pub(crate) fn centered_remainder_unchecked(f: &TestFunction, x: &[f64], y: &[f64], m: usize) -> f64 {
    let mf = m as f64;
    let mut pt = vec![0.0; x.len()];
    (0..=m)
        .map(|j| {
            let a = (m - j) as f64 / mf;
            let b = j as f64 / mf;
            for ((p, &u), &v) in pt.iter_mut().zip(x).zip(y) {
                *p = a * u + b * v;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(m, j) * f.eval(&pt)
        })
        .sum()
}

/// `T_y^{d} f(x) = Σ_{|α| ≤ d} ∂^α f(y) (x − y)^α / α!`.
pub fn taylor_polynomial(f: &TestFunction, y: &[f64], x: &[f64], degree: usize) -> Result<f64> {
    f.check_point(x)?;
    f.check_point(y)?;
    f.check_order(degree)?;
    Ok(taylor_polynomial_unchecked(f, y, x, degree))
}

fn taylor_polynomial_unchecked(f: &TestFunction, y: &[f64], x: &[f64], degree: usize) -> f64 {
    let indices = MultiIndex::up_to_order(f.dim, degree);
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let parts = f.partials(&indices, degree, y);
    indices
        .iter()
        .zip(parts)
        .map(|(a, p)| p * a.monomial(&d) / a.factorial())
        .sum()
}

/// `R_{m−1} f(x, y) = f(x) − T_y^{m−1} f(x)`.
pub fn taylor_remainder(f: &TestFunction, x: &[f64], y: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("remainder order must be >= 1".into()));
    }
    Ok(f.eval(x) - taylor_polynomial(f, y, x, m - 1)?)
}

pub(crate) fn taylor_remainder_unchecked(f: &TestFunction, x: &[f64], y: &[f64], m: usize) -> f64 {
    f.eval(x) - taylor_polynomial_unchecked(f, y, x, m - 1)
}

/// Below this step length the remainders are evaluated through their
/// integral representations instead of the cancelling finite sums.
pub(crate) const SMALL_STEP: f64 = 1e-2;

/// `(Σ s_j, weight)` for the 3-point tensor Gauss–Legendre rule on `[0,1]^m`.
fn cube_sums(m: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    &RULES.get_or_init(|| {
        let axis = composite(0.0, 1.0, 1, &GaussLegendre::new(3));
        (0..=MAX_ORDER)
            .map(|k| {
                tensor(&vec![axis.clone(); k])
                    .into_iter()
                    .map(|(s, w)| (s.iter().sum(), w))
                    .collect()
            })
            .collect()
    })[m]
}

fn segment_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(6))
}

/// `R^m f(x, x + tσ) / t^m`. Short steps use the cube-integral form
/// `(−1)^m m^{−m} ∫_{[0,1]^m} D^m f(x + (t/m)Σ s_j σ)(σ,…,σ) ds`, which stays
/// accurate when `t` is far below the resolution of `x`.
pub(crate) fn centered_quotient_polar(
    f: &TestFunction,
    x: &[f64],
    sigma: &[f64],
    t: f64,
    m: usize,
    y: &mut [f64],
) -> f64 {
    let mf = m as f64;
    if t < SMALL_STEP {
        let h = t / mf;
        let integral: f64 = cube_sums(m)
            .iter()
            .map(|&(sum, w)| {
                for ((p, &a), &b) in y.iter_mut().zip(x).zip(sigma) {
                    *p = a + h * sum * b;
                }
                w * f.m_form(y, sigma, m)
            })
            .sum();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign * mf.powi(-(m as i32)) * integral;
    }
    for ((p, &a), &b) in y.iter_mut().zip(x).zip(sigma) {
        *p = a + t * b;
    }
    centered_remainder_unchecked(f, x, y, m) / t.powi(m as i32)
}

/// `R_{m−1} f(x, x + tσ) / t^m`. Short steps use
/// `(−1)^m/(m−1)! ∫_0^1 u^{m−1} D^m f(x + u t σ)(σ,…,σ) du`. At `m = 1` the
/// two remainders coincide and the centered routine is used.
pub(crate) fn taylor_quotient_polar(
    f: &TestFunction,
    x: &[f64],
    sigma: &[f64],
    t: f64,
    m: usize,
    y: &mut [f64],
) -> f64 {
    if m == 1 {
        return centered_quotient_polar(f, x, sigma, t, m, y);
    }
    if t < SMALL_STEP {
        let integral = segment_rule().integrate(0.0, 1.0, |u| {
            for ((p, &a), &b) in y.iter_mut().zip(x).zip(sigma) {
                *p = a + u * t * b;
            }
            u.powi(m as i32 - 1) * f.m_form(y, sigma, m)
        });
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign / factorial(m - 1) * integral;
    }
    for ((p, &a), &b) in y.iter_mut().zip(x).zip(sigma) {
        *p = a + t * b;
    }
    taylor_remainder_unchecked(f, x, y, m) / t.powi(m as i32)
}

/// `|Δ_h^m f(x) − ∫_{[0,1]^m} D^m f(x + Σ t_j h)(h,…,h) dt|`, the cube
/// integral by tensor Gauss–Legendre with `nodes` points per axis.
pub fn mean_value_identity_check(
    f: &TestFunction,
    x: &[f64],
    h: &[f64],
    m: usize,
    nodes: usize,
) -> Result<f64> {
    let lhs = forward_difference(f, x, h, m)?;
    f.check_order(m)?;
    let gl = GaussLegendre::new(nodes);
    let axis = composite(0.0, 1.0, 1, &gl);
    let mut pt = vec![0.0; x.len()];
    let rhs: f64 = tensor(&vec![axis; m])
        .iter()
        .map(|(t, w)| {
            let s: f64 = t.iter().sum();
            for ((p, &a), &b) in pt.iter_mut().zip(x).zip(h) {
                *p = a + s * b;
            }
            w * f.m_form(&pt, h, m)
        })
        .sum();
    Ok((lhs - rhs).abs())
}

/// Residual of the iterated-integral form of the Taylor remainder,
/// `R_{m−1} f(x + h, x) = ∫_{[0,1]^m} D^m f(x + (Π t_i) h)(h,…,h) Π t_i^{m−i} dt`,
/// with the expansion centred at `x`.
pub fn taylor_integral_identity_check(
    f: &TestFunction,
    x: &[f64],
    h: &[f64],
    m: usize,
    nodes: usize,
) -> Result<f64> {
    f.check_point(x)?;
    f.check_point(h)?;
    if m == 0 {
        return Err(Error::InvalidParameter("remainder order must be >= 1".into()));
    }
    f.check_order(m)?;
    let xh: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + b).collect();
    let lhs = taylor_remainder(f, &xh, x, m)?;
    let gl = GaussLegendre::new(nodes);
    let axis = composite(0.0, 1.0, 1, &gl);
    let mut pt = vec![0.0; x.len()];
    let rhs: f64 = tensor(&vec![axis; m])
        .iter()
        .map(|(t, w)| {
            let prod: f64 = t.iter().product();
            let weight: f64 = t
                .iter()
                .enumerate()
                .map(|(i, ti)| ti.powi((m - 1 - i) as i32))
                .product();
            for ((p, &a), &b) in pt.iter_mut().zip(x).zip(h) {
                *p = a + prod * b;
            }
            w * weight * f.m_form(&pt, h, m)
        })
        .sum();
    Ok((lhs - rhs).abs())
}
