//! The four nonlocal functionals and their local limits.
//!
//! | theorem           | integrand                                        | limit constant            |
//! |-------------------|--------------------------------------------------|---------------------------|
//! | `nguyen_centered` | `δ^p 1{|R^m f| > δ} ‖x−y‖_K^{−(N+mp)}`           | `(N+mp)/(m^{mp+1} p)`     |
//! | `bbm_centered`    | `|R^m f|^p ‖x−y‖_K^{−mp} ρ_ε(‖x−y‖_K)`           | `(N+mp)/m^{mp}`           |
//! | `nguyen_taylor`   | `δ^p 1{|R_{m−1} f| > δ} ‖x−y‖_K^{−(N+mp)}`       | `(N+mp)/((m!)^p m p)`     |
//! | `bbm_taylor`      | `|R_{m−1} f|^p ‖x−y‖_K^{−mp} ρ_ε(‖x−y‖_K)`       | `(N+mp)/(m!)^p`           |
//!
//! Every limit is the constant times `∫_{R^N} ∫_K |D^m f(x)(y,…,y)|^p dy dx`.

use serde::{Deserialize, Serialize};

use crate::calculus::{
    centered_quotient_polar, factorial, taylor_quotient_polar, MultiIndex, TestFunction,
};
use crate::convex_body::ConvexBody;
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_box_body, integrate_double, Estimate, IntegrationPlan, Method, PolarKernel, RadialLaw,
};
use crate::mollifier::{MollifierFamily, CERTIFY_TOL};
use crate::quadrature::{composite, sphere_rule, tensor, GaussLegendre};

pub const MAX_P: f64 = 8.0;
pub const MAX_M: usize = 3;
pub const MAX_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    NguyenCentered,
    BbmCentered,
    NguyenTaylor,
    BbmTaylor,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::NguyenCentered,
        Theorem::BbmCentered,
        Theorem::NguyenTaylor,
        Theorem::BbmTaylor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::NguyenCentered => "nguyen_centered",
            Theorem::BbmCentered => "bbm_centered",
            Theorem::NguyenTaylor => "nguyen_taylor",
            Theorem::BbmTaylor => "bbm_taylor",
        }
    }

    pub fn is_level_set(self) -> bool {
        matches!(self, Theorem::NguyenCentered | Theorem::NguyenTaylor)
    }

    pub fn is_taylor(self) -> bool {
        matches!(self, Theorem::NguyenTaylor | Theorem::BbmTaylor)
    }

    /// The mollified theorem sharing this one's remainder, and vice versa.
    pub fn sibling(self) -> Theorem {
        match self {
            Theorem::NguyenCentered => Theorem::BbmCentered,
            Theorem::BbmCentered => Theorem::NguyenCentered,
            Theorem::NguyenTaylor => Theorem::BbmTaylor,
            Theorem::BbmTaylor => Theorem::NguyenTaylor,
        }
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem `{s}`")))
    }
}

/// `C(theorem, N, m, p)`.
pub fn limit_constant(theorem: Theorem, n: usize, m: usize, p: f64) -> f64 {
    let mf = m as f64;
    let top = n as f64 + mf * p;
    match theorem {
        Theorem::NguyenCentered => top / (mf.powf(mf * p + 1.0) * p),
        Theorem::BbmCentered => top / mf.powf(mf * p),
        Theorem::NguyenTaylor => top / (factorial(m).powf(p) * mf * p),
        Theorem::BbmTaylor => top / factorial(m).powf(p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSpec {
    pub theorem: Theorem,
    pub f: TestFunction,
    pub body: ConvexBody,
    pub m: usize,
    pub p: f64,
    /// `δ` for level-set theorems, `ε` for mollified ones.
    pub parameter: f64,
    /// Required for the mollified theorems; its `ε` is replaced by `parameter`.
    pub mollifier: Option<MollifierFamily>,
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.body.dim();
        if !(self.p > 1.0 && self.p <= MAX_P) {
            return Err(Error::InvalidParameter(format!(
                "p must satisfy p > 1 and p <= {MAX_P}, got {}",
                self.p
            )));
        }
        if self.m == 0 || self.m > MAX_M {
            return Err(Error::InvalidParameter(format!(
                "m must be in 1..={MAX_M}, got {}",
                self.m
            )));
        }
        if n > MAX_N {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at most {MAX_N}, got {n}"
            )));
        }
        if self.f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.f.dim(),
            });
        }
        if self.f.smoothness_order() < self.m + 1 {
            return Err(Error::OrderTooLarge {
                function: self.f.name().to_string(),
                requested: self.m + 1,
                available: self.f.smoothness_order(),
            });
        }
        if !(self.parameter.is_finite() && self.parameter > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "parameter must be positive, got {}",
                self.parameter
            )));
        }
        if !self.f.in_sobolev() {
            return Err(Error::InvalidParameter(format!(
                "`{}` is not compactly supported and has no finite energy",
                self.f.name()
            )));
        }
        if !self.theorem.is_level_set() {
            match &self.mollifier {
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "{} needs a mollifier family",
                        self.theorem
                    )))
                }
                Some(fam) if fam.dim() != n => {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: fam.dim(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn with_parameter(&self, parameter: f64) -> Self {
        Self {
            parameter,
            ..self.clone()
        }
    }

    pub fn with_theorem(&self, theorem: Theorem) -> Self {
        Self {
            theorem,
            ..self.clone()
        }
    }

    fn check_box(&self, plan: &IntegrationPlan) -> Result<()> {
        if plan.outer_box_radius < self.f.support_radius() {
            return Err(Error::InvalidParameter(format!(
                "outer box radius {} is smaller than the support radius {} of `{}`",
                plan.outer_box_radius,
                self.f.support_radius(),
                self.f.name()
            )));
        }
        Ok(())
    }
}

/// Evaluates the functional named by `spec.theorem`.
pub fn evaluate(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    match spec.theorem {
        Theorem::NguyenCentered | Theorem::NguyenTaylor => level_set(spec, plan),
        Theorem::BbmCentered | Theorem::BbmTaylor => mollified(spec, plan),
    }
}

pub fn nguyen_centered(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    expect(spec, Theorem::NguyenCentered)?;
    level_set(spec, plan)
}

pub fn bbm_centered(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    expect(spec, Theorem::BbmCentered)?;
    mollified(spec, plan)
}

pub fn nguyen_taylor(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    expect(spec, Theorem::NguyenTaylor)?;
    level_set(spec, plan)
}

pub fn bbm_taylor(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    expect(spec, Theorem::BbmTaylor)?;
    mollified(spec, plan)
}

fn expect(spec: &FunctionalSpec, theorem: Theorem) -> Result<()> {
    if spec.theorem != theorem {
        return Err(Error::InvalidParameter(format!(
            "spec is for {}, not {theorem}",
            spec.theorem
        )));
    }
    Ok(())
}

/// `R/t^m` for the remainder selected by `spec.theorem`.
fn quotient(
    taylor: bool,
    f: &TestFunction,
    x: &[f64],
    sigma: &[f64],
    t: f64,
    m: usize,
) -> f64 {
    let mut buf = [0.0; 4];
    let y = &mut buf[..x.len()];
    if taylor {
        taylor_quotient_polar(f, x, sigma, t, m, y)
    } else {
        centered_quotient_polar(f, x, sigma, t, m, y)
    }
}

struct LevelSetKernel<'a> {
    spec: &'a FunctionalSpec,
    law: RadialLaw,
    /// `δ^p ∫_{t_min}^{t_max} t^{−1−mp} dt`.
    scale: f64,
    exponent: f64,
}

impl PolarKernel for LevelSetKernel<'_> {
    fn dim(&self) -> usize {
        self.spec.body.dim()
    }

    fn radial_law(&self, _sigma: &[f64]) -> RadialLaw {
        self.law
    }

    fn eval(&self, x: &[f64], sigma: &[f64], t: f64) -> f64 {
        let s = self.spec;
        let q = quotient(s.theorem.is_taylor(), &s.f, x, sigma, t, s.m);
        if q.abs() * t.powi(s.m as i32) > s.parameter {
            s.parameter.powf(s.p) * (t * s.body.gauge_unchecked(sigma)).powf(-self.exponent)
        } else {
            0.0
        }
    }

    fn weighted(&self, x: &[f64], sigma: &[f64], t: f64, _law: &RadialLaw) -> f64 {
        let s = self.spec;
        let q = quotient(s.theorem.is_taylor(), &s.f, x, sigma, t, s.m);
        if q.abs() * t.powi(s.m as i32) > s.parameter {
            self.scale * s.body.gauge_unchecked(sigma).powf(-self.exponent)
        } else {
            0.0
        }
    }
}

/// Level-set functional with exact lower truncation.
///
/// With `M ≥ sup |D^m f(z)(σ,…,σ)|` over unit `σ`, `|R^m f(x, x+tσ)| ≤ (t/m)^m M`
/// and `|R_{m−1} f(x, x+tσ)| ≤ t^m M / m!`, so the indicator vanishes for
/// `t` below `m (δ/M)^{1/m}` and `(m! δ/M)^{1/m}` respectively.
fn level_set(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    spec.validate()?;
    spec.check_box(plan)?;
    if spec.f.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let n = spec.body.dim();
    let (m, p, delta) = (spec.m, spec.p, spec.parameter);
    let mf = m as f64;
    let half = plan.outer_box_radius;
    let t_max = 2.0 * (n as f64).sqrt() * half + half;
    if !spec.theorem.is_taylor() {
        let sup_f = spec.f.partial_sup_bounds(0, half + t_max)[0];
        if delta > 2f64.powi(m as i32) * sup_f {
            return Ok(Estimate::exact(0.0));
        }
    }
    let bound = spec.f.m_form_bound(m, half + 1.0);
    if bound == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let t_min = if spec.theorem.is_taylor() {
        (factorial(m) * delta / bound).powf(1.0 / mf)
    } else {
        mf * (delta / bound).powf(1.0 / mf)
    }
    .min(1.0);
    let exponent = n as f64 + mf * p;
    let law = RadialLaw::PowerLaw {
        exponent: 1.0 + mf * p,
        lo: t_min,
        hi: t_max,
    };
    let kernel = LevelSetKernel {
        spec,
        law,
        scale: delta.powf(p) * law.normalizer(),
        exponent,
    };
    let mut est = integrate_double(&kernel, plan)?;
    // δ^p ∫_{t_max}^∞ t^{−1−mp} dt · ∫_{S} ‖σ‖_K^{−(N+mp)} dσ · (2L)^N, with
    // the sphere integral bounded through the outer radius.
    let sphere = crate::quadrature::sphere_area(n) * spec.body.outer_radius().powf(exponent);
    est.tail_bound = delta.powf(p) * t_max.powf(-mf * p) / (mf * p) * sphere * (2.0 * half).powi(n as i32);
    check_finite(spec, est)
}

struct MollifiedKernel<'a> {
    spec: &'a FunctionalSpec,
    family: MollifierFamily,
}

impl PolarKernel for MollifiedKernel<'_> {
    fn dim(&self) -> usize {
        self.spec.body.dim()
    }

    fn radial_law(&self, sigma: &[f64]) -> RadialLaw {
        RadialLaw::Mollifier {
            family: self.family,
            stretch: 1.0 / self.spec.body.gauge_unchecked(sigma),
        }
    }

    fn eval(&self, x: &[f64], sigma: &[f64], t: f64) -> f64 {
        let s = self.spec;
        let g = s.body.gauge_unchecked(sigma);
        let q = quotient(s.theorem.is_taylor(), &s.f, x, sigma, t, s.m);
        q.abs().powf(s.p) * g.powf(-(s.m as f64) * s.p) * self.family.evaluate(t * g)
    }

    fn weighted(&self, x: &[f64], sigma: &[f64], t: f64, _law: &RadialLaw) -> f64 {
        let s = self.spec;
        let g = s.body.gauge_unchecked(sigma);
        let q = quotient(s.theorem.is_taylor(), &s.f, x, sigma, t, s.m);
        // |R|^p / r^{mp} with r = t g, the t^{mp} cancelled analytically
        self.family.total_mass() * q.abs().powf(s.p) * g.powf(-(s.body.dim() as f64 + s.m as f64 * s.p))
    }
}

fn mollified(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<Estimate> {
    spec.validate()?;
    spec.check_box(plan)?;
    let family = spec
        .mollifier
        .expect("validated")
        .with_epsilon(spec.parameter)?;
    let residual = (family.numeric_mass_above(0.0) - 1.0).abs();
    if residual > CERTIFY_TOL {
        return Err(Error::Certification(format!(
            "normalization residual {residual:.3e} exceeds {CERTIFY_TOL:e}"
        )));
    }
    if spec.f.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let kernel = MollifiedKernel { spec, family };
    let est = integrate_double(&kernel, plan)?;
    check_finite(spec, est)
}

fn check_finite(spec: &FunctionalSpec, est: Estimate) -> Result<Estimate> {
    if !(est.value.is_finite() && est.stderr.is_finite()) {
        return Err(Error::NonFiniteSweep(spec.parameter));
    }
    Ok(est)
}

/// `∫_{[−L,L]^N} ∫_K |D^m f(x)(y,…,y)|^p dy dx`, common to all four limits.
pub fn shared_factor(
    f: &TestFunction,
    body: &ConvexBody,
    m: usize,
    p: f64,
    plan: &IntegrationPlan,
) -> Result<Estimate> {
    if f.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: f.dim(),
        });
    }
    if f.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let indices = MultiIndex::of_order(body.dim(), m);
    let weights: Vec<f64> = indices.iter().map(|a| a.multinomial()).collect();
    integrate_box_body(
        |x| f.partials(&indices, m, x),
        |d: &Vec<f64>, y| {
            indices
                .iter()
                .zip(&weights)
                .zip(d)
                .map(|((a, w), c)| w * c * a.monomial(y))
                .sum::<f64>()
                .abs()
                .powf(p)
        },
        body,
        plan,
    )
}

/// The closed-form local quantity the functional converges to.
pub fn local_limit(spec: &FunctionalSpec, plan: &IntegrationPlan) -> Result<f64> {
    spec.validate()?;
    let s = shared_factor(&spec.f, &spec.body, spec.m, spec.p, plan)?;
    Ok(limit_constant(spec.theorem, spec.body.dim(), spec.m, spec.p) * s.value)
}

/// Local limits of all four theorems from one shared-factor evaluation.
pub fn local_limits(
    f: &TestFunction,
    body: &ConvexBody,
    m: usize,
    p: f64,
    plan: &IntegrationPlan,
) -> Result<[(Theorem, f64); 4]> {
    let s = shared_factor(f, body, m, p, plan)?.value;
    Ok(Theorem::ALL.map(|t| (t, limit_constant(t, body.dim(), m, p) * s)))
}

/// `K_{N,p} = ∫_{S^{N−1}} |e·σ|^p dσ` by sphere quadrature.
pub fn sphere_constant(n: usize, p: f64) -> Result<f64> {
    let rule = sphere_rule(n, if n == 3 { 200 } else { 8192 })
        .ok_or_else(|| Error::Unsupported(format!("sphere quadrature in dimension {n}")))?;
    Ok(rule.iter().map(|(s, w)| w * s[0].abs().powf(p)).sum())
}

/// `Σ_{|α|=m} ∫_{[−L,L]^N} |∂^α f|^p dx` by tensor Gauss–Legendre.
pub fn derivative_norm_pp(f: &TestFunction, m: usize, p: f64, half: f64, nodes: usize) -> f64 {
    let indices = MultiIndex::of_order(f.dim(), m);
    let per = nodes.clamp(1, 10);
    let axis = composite(-half, half, nodes.div_ceil(per), &GaussLegendre::new(per));
    tensor(&vec![axis; f.dim()])
        .iter()
        .map(|(x, w)| w * f.partials(&indices, m, x).iter().map(|d| d.abs().powf(p)).sum::<f64>())
        .sum()
}

/// `∫_{[−L,L]^N} |∇f|^p dx` with the Euclidean gradient norm.
pub fn gradient_norm_pp(f: &TestFunction, p: f64, half: f64, nodes: usize) -> f64 {
    let indices = MultiIndex::of_order(f.dim(), 1);
    let per = nodes.clamp(1, 10);
    let axis = composite(-half, half, nodes.div_ceil(per), &GaussLegendre::new(per));
    tensor(&vec![axis; f.dim()])
        .iter()
        .map(|(x, w)| {
            let g2: f64 = f.partials(&indices, 1, x).iter().map(|d| d * d).sum();
            w * g2.powf(p / 2.0)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `Σ_{|α|=m} ∫|∂^α f|^p`.
    pub norm_pp: f64,
    pub bound_factor: f64,
    /// `(δ, value, stderr)`.
    pub values: Vec<(f64, f64, f64)>,
    /// `max value / norm_pp`; 0 when the norm vanishes.
    pub max_ratio: f64,
}

pub const DEFAULT_BOUND_FACTOR: f64 = 50.0;

/// Checks `value(δ) ≤ bound_factor · ‖∇^m f‖_p^p` across a δ grid.
pub fn uniform_bound_check(
    spec: &FunctionalSpec,
    delta_grid: &[f64],
    plan: &IntegrationPlan,
    bound_factor: f64,
) -> Result<BoundReport> {
    if !spec.theorem.is_level_set() {
        return Err(Error::InvalidParameter(format!(
            "uniform bound applies to level-set theorems, not {}",
            spec.theorem
        )));
    }
    if delta_grid.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    let nodes = match plan.method {
        Method::Quadrature { nodes_per_axis } => nodes_per_axis.max(40),
        Method::MonteCarlo { .. } => norm_nodes(spec.body.dim()),
    };
    let norm_pp = derivative_norm_pp(&spec.f, spec.m, spec.p, plan.outer_box_radius, nodes);
    let mut values = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let est = evaluate(&spec.with_parameter(delta), plan)?;
        values.push((delta, est.value, est.stderr));
    }
    bound_report(norm_pp, values, bound_factor)
}

/// Default quadrature nodes per axis for [`derivative_norm_pp`] by dimension.
pub fn norm_nodes(dim: usize) -> usize {
    [400, 200, 60][dim.clamp(1, 3) - 1]
}

/// Checks already computed `(δ, value, stderr)` triples against
/// `bound_factor · norm_pp`.
pub fn bound_report(
    norm_pp: f64,
    values: Vec<(f64, f64, f64)>,
    bound_factor: f64,
) -> Result<BoundReport> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty delta grid".into()));
    }
    let bound = bound_factor * norm_pp;
    let mut max_ratio: f64 = 0.0;
    for &(delta, value, _) in &values {
        if value > bound {
            return Err(Error::BoundViolation { delta, value, bound });
        }
        if norm_pp > 0.0 {
            max_ratio = max_ratio.max(value / norm_pp);
        }
    }
    Ok(BoundReport {
        norm_pp,
        bound_factor,
        values,
        max_ratio,
    })
}
