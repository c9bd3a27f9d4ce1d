//! Sampling and quadrature engine for the polar-coordinate double integrals.
//!
//! Double integrals over `R^N × R^N` are written with `y = x + tσ`,
//!
//! ```text
//! ∫∫ F(x, y) dy dx = ∫_{box} ∫_{S^{N−1}} ∫_0^∞ F(x, x + tσ) t^{N−1} dt dσ dx,
//! ```
//!
//! with `x` restricted to the cube `[−L, L]^N`. The radial variable is drawn
//! from a per-direction law supplied by the kernel, so singular radial
//! weights can be matched by importance sampling.
//!
//! Monte Carlo runs are split into one shard per worker; shard `i` draws from
//! ChaCha stream `i` of the plan seed, and shard accumulators are merged in
//! shard order. A fixed `(seed, workers)` pair is therefore bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex_body::{random_direction, ConvexBody};
use crate::error::{Error, Result};
use crate::mollifier::MollifierFamily;
use crate::quadrature::{composite, sphere_area, sphere_rule, tensor, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    MonteCarlo {
        samples: u64,
        seed: u64,
        workers: usize,
    },
    Quadrature {
        nodes_per_axis: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationPlan {
    pub method: Method,
    /// Half-width `L` of the cube the outer variable is restricted to.
    pub outer_box_radius: f64,
    /// Number of equal-mass radial strata (Monte Carlo only).
    pub strata: usize,
}

impl IntegrationPlan {
    pub fn monte_carlo(samples: u64, seed: u64, workers: usize) -> Self {
        Self {
            method: Method::MonteCarlo {
                samples,
                seed,
                workers: workers.max(1),
            },
            outer_box_radius: 1.0,
            strata: 16,
        }
    }

    pub fn quadrature(nodes_per_axis: usize) -> Self {
        Self {
            method: Method::Quadrature { nodes_per_axis },
            outer_box_radius: 1.0,
            strata: 1,
        }
    }

    pub fn with_box(mut self, radius: f64) -> Self {
        self.outer_box_radius = radius;
        self
    }

    pub fn with_strata(mut self, strata: usize) -> Self {
        self.strata = strata.max(1);
        self
    }

    pub fn workers(&self) -> usize {
        match self.method {
            Method::MonteCarlo { workers, .. } => workers,
            Method::Quadrature { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error; 0 for deterministic quadrature.
    pub stderr: f64,
    pub samples: u64,
    pub workers: usize,
    /// Analytic bound on the mass discarded by radial truncation.
    pub tail_bound: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples: 0,
            workers: 1,
            tail_bound: 0.0,
        }
    }
}

/// Radial sampling law for `t`, possibly depending on the direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialLaw {
    Uniform { lo: f64, hi: f64 },
    /// Density proportional to `t^{−exponent}` on `[lo, hi]`.
    PowerLaw { exponent: f64, lo: f64, hi: f64 },
    /// `t = stretch · r` with `r` drawn from `r^{N−1} ρ_ε(r) dr`.
    Mollifier { family: MollifierFamily, stretch: f64 },
}

impl RadialLaw {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            RadialLaw::Uniform { lo, hi } | RadialLaw::PowerLaw { lo, hi, .. } => (lo, hi),
            RadialLaw::Mollifier { family, stretch } => (0.0, stretch * family.support_upper()),
        }
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::EmptyRadialInterval { lo, hi });
        }
        Ok(())
    }

    /// `∫_lo^hi t^{−a} dt` for power laws, the interval length for uniform
    /// laws and the radial mass for mollifier laws.
    pub fn normalizer(&self) -> f64 {
        match *self {
            RadialLaw::Uniform { lo, hi } => hi - lo,
            RadialLaw::PowerLaw { exponent, lo, hi } => {
                let b = 1.0 - exponent;
                if b.abs() < 1e-12 {
                    (hi / lo).ln()
                } else {
                    // (hi^b − lo^b)/b, factored around the dominant endpoint
                    if b < 0.0 {
                        lo.powf(b) * (-(b * (hi / lo).ln()).exp_m1()) / -b
                    } else {
                        hi.powf(b) * (-(b * (lo / hi).ln()).exp_m1()) / b
                    }
                }
            }
            RadialLaw::Mollifier { family, .. } => family.total_mass(),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            RadialLaw::Uniform { lo, hi } => lo + u * (hi - lo),
            RadialLaw::PowerLaw { exponent, lo, hi } => {
                let b = 1.0 - exponent;
                if b.abs() < 1e-12 {
                    lo * ((hi / lo).ln() * u).exp()
                } else if b < 0.0 {
                    // t^b = lo^b ((1 − u) + u (hi/lo)^b)
                    let r = (b * (hi / lo).ln()).exp();
                    lo * ((1.0 - u) + u * r).powf(1.0 / b)
                } else {
                    let r = (b * (lo / hi).ln()).exp();
                    hi * (u + (1.0 - u) * r).powf(1.0 / b)
                }
                .clamp(lo, hi)
            }
            RadialLaw::Mollifier { family, stretch } => stretch * family.inverse_cdf(u),
        }
    }

    /// Probability density of `t`.
    pub fn density(&self, t: f64) -> f64 {
        let (lo, hi) = self.bounds();
        if t < lo || t > hi {
            return 0.0;
        }
        match *self {
            RadialLaw::Uniform { .. } => 1.0 / (hi - lo),
            RadialLaw::PowerLaw { exponent, .. } => t.powf(-exponent) / self.normalizer(),
            RadialLaw::Mollifier { family, stretch } => family.radial_density(t / stretch) / stretch,
        }
    }
}

/// Integrand of a polar double integral.
pub trait PolarKernel: Sync {
    fn dim(&self) -> usize;

    fn radial_law(&self, sigma: &[f64]) -> RadialLaw;

    /// `k(x, σ, t)`; the engine integrates `k · t^{N−1}`.
    fn eval(&self, x: &[f64], sigma: &[f64], t: f64) -> f64;

    /// `k(x, σ, t) t^{N−1} / q(t)` for `t` drawn from `law`. Kernels override
    /// this when the ratio has a form that avoids overflow.
    fn weighted(&self, x: &[f64], sigma: &[f64], t: f64, law: &RadialLaw) -> f64 {
        self.eval(x, sigma, t) * t.powi(self.dim() as i32 - 1) / law.density(t)
    }
}

/// A [`PolarKernel`] assembled from closures.
pub struct FnKernel<L, K> {
    dim: usize,
    law: L,
    kernel: K,
}

impl<L, K> FnKernel<L, K>
where
    L: Fn(&[f64]) -> RadialLaw + Sync,
    K: Fn(&[f64], &[f64], f64) -> f64 + Sync,
{
    pub fn new(dim: usize, law: L, kernel: K) -> Self {
        Self { dim, law, kernel }
    }
}

impl<L, K> PolarKernel for FnKernel<L, K>
where
    L: Fn(&[f64]) -> RadialLaw + Sync,
    K: Fn(&[f64], &[f64], f64) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial_law(&self, sigma: &[f64]) -> RadialLaw {
        (self.law)(sigma)
    }

    fn eval(&self, x: &[f64], sigma: &[f64], t: f64) -> f64 {
        (self.kernel)(x, sigma, t)
    }
}

/// Streaming mean and variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Shard sizes: `samples` split as evenly as possible, larger shards first.
fn shard_sizes(samples: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    (0..w)
        .map(|i| samples / w + u64::from(i < samples % w))
        .collect()
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

fn run_shards<F>(samples: u64, seed: u64, workers: usize, shard: F) -> Result<Welford>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<Welford> + Sync,
{
    let sizes = shard_sizes(samples, workers);
    let parts: Vec<Result<Welford>> = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| shard(&mut shard_rng(seed, i), n))
        .collect();
    let mut acc = Welford::default();
    for p in parts {
        acc.merge(&p?);
    }
    Ok(acc)
}

/// `∫_{[−L,L]^N} ∫_{S^{N−1}} ∫ k(x, σ, t) t^{N−1} dt dσ dx`.
pub fn integrate_double<K: PolarKernel + ?Sized>(kernel: &K, plan: &IntegrationPlan) -> Result<Estimate> {
    let n = kernel.dim();
    let half = plan.outer_box_radius;
    if !(half > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "outer box radius must be positive, got {half}"
        )));
    }
    let measure = (2.0 * half).powi(n as i32) * sphere_area(n);
    match plan.method {
        Method::MonteCarlo {
            samples,
            seed,
            workers,
        } => {
            if samples == 0 {
                return Err(Error::EmptyPlan);
            }
            let strata = plan.strata.max(1) as u64;
            let acc = run_shards(samples, seed, workers.max(1), |rng, count| {
                let mut acc = Welford::default();
                let mut x = vec![0.0; n];
                for i in 0..count {
                    for xi in x.iter_mut() {
                        *xi = rng.random_range(-half..half);
                    }
                    let sigma = random_direction(n, rng);
                    let law = kernel.radial_law(&sigma);
                    law.check()?;
                    let u = ((i % strata) as f64 + rng.random::<f64>()) / strata as f64;
                    let t = law.inverse_cdf(u);
                    let w = kernel.weighted(&x, &sigma, t, &law);
                    if !w.is_finite() {
                        return Err(Error::NonFiniteKernel {
                            value: w,
                            x: x.clone(),
                            sigma,
                            t,
                        });
                    }
                    acc.push(w);
                }
                Ok(acc)
            })?;
            Ok(Estimate {
                value: measure * acc.mean,
                stderr: measure * acc.stderr(),
                samples,
                workers,
                tail_bound: 0.0,
            })
        }
        Method::Quadrature { nodes_per_axis } => {
            if nodes_per_axis == 0 {
                return Err(Error::EmptyPlan);
            }
            let sphere = sphere_rule(n, nodes_per_axis).ok_or_else(|| {
                Error::Unsupported(format!("quadrature in dimension {n}"))
            })?;
            let (xs, us) = panel_rules(-half, half, nodes_per_axis);
            let xnodes = tensor(&vec![xs; n]);
            let mut total = 0.0;
            for (sigma, ws) in &sphere {
                let law = kernel.radial_law(sigma);
                law.check()?;
                let ts: Vec<(f64, f64)> = us.iter().map(|&(u, wu)| (law.inverse_cdf(u), wu)).collect();
                let partial: Result<Vec<f64>> = xnodes
                    .par_iter()
                    .map(|(x, wx)| {
                        let mut s = 0.0;
                        for &(t, wu) in &ts {
                            let w = kernel.weighted(x, sigma, t, &law);
                            if !w.is_finite() {
                                return Err(Error::NonFiniteKernel {
                                    value: w,
                                    x: x.clone(),
                                    sigma: sigma.clone(),
                                    t,
                                });
                            }
                            s += wu * w;
                        }
                        Ok(wx * s)
                    })
                    .collect();
                total += ws * partial?.iter().sum::<f64>();
            }
            Ok(Estimate {
                value: total,
                stderr: 0.0,
                samples: 0,
                workers: 1,
                tail_bound: 0.0,
            })
        }
    }
}

type Rule1d = Vec<(f64, f64)>;

/// Composite rules with 10-point panels: one on `[a, b]` and one on `[0, 1]`.
fn panel_rules(a: f64, b: f64, nodes: usize) -> (Rule1d, Rule1d) {
    let per = nodes.min(10);
    let panels = nodes.div_ceil(per);
    let gl = GaussLegendre::new(per);
    (composite(a, b, panels, &gl), composite(0.0, 1.0, panels, &gl))
}

/// `∫_K g(y) dy`.
///
/// Monte Carlo uses uniform samples in `K` times `vol(K)`, the volume coming
/// from the closed form where one exists and from the rejection acceptance
/// rate otherwise. Quadrature uses the body's mapped tensor rule.
pub fn integrate_body<G>(g: G, body: &ConvexBody, plan: &IntegrationPlan) -> Result<Estimate>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    match plan.method {
        Method::MonteCarlo {
            samples,
            seed,
            workers,
        } => {
            if samples == 0 {
                return Err(Error::EmptyPlan);
            }
            let closed = body.volume();
            let sizes = shard_sizes(samples, workers.max(1));
            let parts: Vec<(Welford, u64)> = sizes
                .par_iter()
                .enumerate()
                .map(|(i, &count)| {
                    let mut rng = shard_rng(seed, i);
                    let mut acc = Welford::default();
                    let mut attempts = 0;
                    for _ in 0..count {
                        let y = if closed.is_some() {
                            body.sample_in_body(&mut rng)
                        } else {
                            let (y, a) = body.sample_by_rejection(&mut rng);
                            attempts += a;
                            y
                        };
                        acc.push(g(&y));
                    }
                    (acc, attempts)
                })
                .collect();
            let mut acc = Welford::default();
            let mut attempts = 0;
            for (w, a) in &parts {
                acc.merge(w);
                attempts += a;
            }
            let (volume, vol_err) = match closed {
                Some(v) => (v, 0.0),
                None => {
                    let rate = samples as f64 / attempts as f64;
                    let bbox = body.bounding_box_volume();
                    let err = bbox * (rate * (1.0 - rate) / attempts as f64).sqrt();
                    (bbox * rate, err)
                }
            };
            let value = volume * acc.mean;
            let stderr = ((volume * acc.stderr()).powi(2) + (vol_err * acc.mean).powi(2)).sqrt();
            if !value.is_finite() {
                return Err(Error::InvalidParameter("non-finite body integrand".into()));
            }
            Ok(Estimate {
                value,
                stderr,
                samples,
                workers,
                tail_bound: 0.0,
            })
        }
        Method::Quadrature { nodes_per_axis } => {
            if nodes_per_axis == 0 {
                return Err(Error::EmptyPlan);
            }
            let rule = body.quadrature_rule(nodes_per_axis)?;
            let value: f64 = rule.iter().map(|(y, w)| w * g(y)).sum();
            Ok(Estimate::exact(value))
        }
    }
}

/// `∫_{[−L,L]^N} ∫_K g(x, y) dy dx` with `g` split as `inner(outer(x), y)`
/// so per-`x` work is done once per outer node.
pub fn integrate_box_body<P, O, G>(
    outer: O,
    inner: G,
    body: &ConvexBody,
    plan: &IntegrationPlan,
) -> Result<Estimate>
where
    O: Fn(&[f64]) -> P + Sync,
    G: Fn(&P, &[f64]) -> f64 + Sync,
{
    let n = body.dim();
    let half = plan.outer_box_radius;
    if !(half > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "outer box radius must be positive, got {half}"
        )));
    }
    let box_volume = (2.0 * half).powi(n as i32);
    match plan.method {
        Method::MonteCarlo {
            samples,
            seed,
            workers,
        } => {
            if samples == 0 {
                return Err(Error::EmptyPlan);
            }
            let closed = body.volume();
            let sizes = shard_sizes(samples, workers.max(1));
            let parts: Vec<(Welford, u64)> = sizes
                .par_iter()
                .enumerate()
                .map(|(i, &count)| {
                    let mut rng = shard_rng(seed, i);
                    let mut acc = Welford::default();
                    let mut attempts = 0;
                    let mut x = vec![0.0; n];
                    for _ in 0..count {
                        for xi in x.iter_mut() {
                            *xi = rng.random_range(-half..half);
                        }
                        let y = if closed.is_some() {
                            body.sample_in_body(&mut rng)
                        } else {
                            let (y, a) = body.sample_by_rejection(&mut rng);
                            attempts += a;
                            y
                        };
                        acc.push(inner(&outer(&x), &y));
                    }
                    (acc, attempts)
                })
                .collect();
            let mut acc = Welford::default();
            let mut attempts = 0;
            for (w, a) in &parts {
                acc.merge(w);
                attempts += a;
            }
            let volume = match closed {
                Some(v) => v,
                None => body.bounding_box_volume() * samples as f64 / attempts as f64,
            };
            Ok(Estimate {
                value: box_volume * volume * acc.mean,
                stderr: box_volume * volume * acc.stderr(),
                samples,
                workers,
                tail_bound: 0.0,
            })
        }
        Method::Quadrature { nodes_per_axis } => {
            if nodes_per_axis == 0 {
                return Err(Error::EmptyPlan);
            }
            let rule = body.quadrature_rule(nodes_per_axis.min(48))?;
            let (xs, _) = panel_rules(-half, half, nodes_per_axis);
            let xnodes = tensor(&vec![xs; n]);
            let value: f64 = xnodes
                .par_iter()
                .map(|(x, wx)| {
                    let prep = outer(x);
                    wx * rule.iter().map(|(y, wy)| wy * inner(&prep, y)).sum::<f64>()
                })
                .collect::<Vec<f64>>()
                .iter()
                .sum();
            Ok(Estimate::exact(value))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

/// Both sides of the sphere-to-body identity
/// `∫_{S^{N−1}} ‖σ‖_K^{−(N+mp)} |g(σ)|^p dσ = (N+mp) ∫_K |g(y)|^p dy`
/// for `g` positively homogeneous of degree `m`.
pub fn sphere_body_identity_check<G>(
    g: G,
    body: &ConvexBody,
    m: usize,
    p: f64,
    plan: &IntegrationPlan,
) -> Result<IdentityGap>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let n = body.dim();
    let exponent = n as f64 + m as f64 * p;
    let sphere_nodes = match plan.method {
        Method::Quadrature { nodes_per_axis } => 256 * nodes_per_axis.max(1),
        Method::MonteCarlo { .. } => 8192,
    };
    let sphere = sphere_rule(n, if n == 3 { 128 } else { sphere_nodes })
        .ok_or_else(|| Error::Unsupported(format!("sphere quadrature in dimension {n}")))?;
    let lhs: f64 = sphere
        .iter()
        .map(|(s, w)| w * body.gauge_unchecked(s).powf(-exponent) * g(s).abs().powf(p))
        .sum();
    let rhs = exponent * integrate_body(|y| g(y).abs().powf(p), body, plan)?.value;
    let rel_gap = if rhs == 0.0 && lhs == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / rhs.abs()
    };
    Ok(IdentityGap { lhs, rhs, rel_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_body::BodyKind;
    use crate::mollifier::MollifierKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn interval() -> ConvexBody {
        ConvexBody::new(BodyKind::Box {
            half_widths: vec![1.0],
        })
        .unwrap()
    }

    #[test]
    fn constant_kernel_measure() {
        let k = FnKernel::new(1, |_| RadialLaw::Uniform { lo: 0.5, hi: 1.0 }, |_, _, _| 1.0);
        let plan = IntegrationPlan::monte_carlo(20_000, 1, 2);
        let e = integrate_double(&k, &plan).unwrap();
        assert!((e.value - 2.0).abs() <= 3.0 * e.stderr + 1e-12);
        let q = integrate_double(&k, &IntegrationPlan::quadrature(20)).unwrap();
        assert_relative_eq!(q.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn matched_importance_has_zero_variance() {
        let (lo, hi) = (0.01, 3.0);
        let k = FnKernel::new(
            1,
            move |_| RadialLaw::PowerLaw { exponent: 2.0, lo, hi },
            |_, _, t| 1.0 / (t * t),
        );
        let e = integrate_double(&k, &IntegrationPlan::monte_carlo(10_000, 9, 3)).unwrap();
        let exact = 2.0 * 2.0 * (1.0 / lo - 1.0 / hi);
        assert_relative_eq!(e.value, exact, max_relative = 1e-12);
        assert!(e.stderr <= 1e-10 * exact);
    }

    #[test]
    fn empty_plan_and_radial_interval_errors() {
        let k = FnKernel::new(1, |_| RadialLaw::Uniform { lo: 0.5, hi: 1.0 }, |_, _, _| 1.0);
        assert_eq!(
            integrate_double(&k, &IntegrationPlan::monte_carlo(0, 1, 1)),
            Err(Error::EmptyPlan)
        );
        let bad = FnKernel::new(1, |_| RadialLaw::Uniform { lo: 1.0, hi: 1.0 }, |_, _, _| 1.0);
        assert!(matches!(
            integrate_double(&bad, &IntegrationPlan::monte_carlo(10, 1, 1)),
            Err(Error::EmptyRadialInterval { .. })
        ));
        assert_eq!(
            integrate_body(|_| 1.0, &interval(), &IntegrationPlan::monte_carlo(0, 1, 1)),
            Err(Error::EmptyPlan)
        );
    }

    #[test]
    fn non_finite_kernel_reports_coordinates() {
        let k = FnKernel::new(1, |_| RadialLaw::Uniform { lo: 0.5, hi: 1.0 }, |_, _, _| f64::NAN);
        match integrate_double(&k, &IntegrationPlan::monte_carlo(10, 1, 1)) {
            Err(Error::NonFiniteKernel { x, sigma, .. }) => {
                assert_eq!(x.len(), 1);
                assert_eq!(sigma.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn determinism_and_worker_split() {
        let k = FnKernel::new(
            2,
            |_| RadialLaw::PowerLaw { exponent: 3.0, lo: 0.1, hi: 2.0 },
            |x: &[f64], s: &[f64], t: f64| (-(x[0] + t * s[0]).powi(2)).exp() / t.powi(4),
        );
        let plan = IntegrationPlan::monte_carlo(50_000, 42, 4);
        let a = integrate_double(&k, &plan).unwrap();
        let b = integrate_double(&k, &plan).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = integrate_double(&k, &IntegrationPlan::monte_carlo(50_000, 4242, 4)).unwrap();
        let combined = (a.stderr.powi(2) + c.stderr.powi(2)).sqrt();
        assert!((a.value - c.value).abs() <= 4.0 * combined);
        assert_eq!(shard_sizes(10, 4), vec![3, 3, 2, 2]);
    }

    #[test]
    fn quadrature_and_monte_carlo_agree_in_one_dimension() {
        let k = FnKernel::new(
            1,
            |_| RadialLaw::PowerLaw { exponent: 1.5, lo: 0.05, hi: 4.0 },
            |x: &[f64], s: &[f64], t: f64| {
                let y = x[0] + t * s[0];
                ((-x[0] * x[0]).exp() - (-y * y).exp()).powi(2) * t.powf(-1.5)
            },
        );
        let q = integrate_double(&k, &IntegrationPlan::quadrature(200).with_box(4.0)).unwrap();
        let mc = integrate_double(
            &k,
            &IntegrationPlan::monte_carlo(400_000, 5, 4).with_box(4.0),
        )
        .unwrap();
        let tol = (3.0 * mc.stderr).max(1e-3 * q.value.abs());
        assert!((q.value - mc.value).abs() <= tol, "{q:?} vs {mc:?}");
    }

    #[test]
    fn importance_sampling_is_unbiased_over_repetitions() {
        // ∫_{[-1,1]} ∫_{±1} ∫_{0.2}^{2} t^{-2} dt = 4 (1/0.2 − 1/2) = 18,
        // sampled against a mismatched t^{-1} law.
        let k = FnKernel::new(
            1,
            |_| RadialLaw::PowerLaw { exponent: 1.0, lo: 0.2, hi: 2.0 },
            |_, _, t| 1.0 / (t * t),
        );
        let exact = 18.0;
        let mut z2 = 0.0;
        let mut outside = 0;
        for rep in 0..50 {
            let e = integrate_double(&k, &IntegrationPlan::monte_carlo(2_000, rep, 2).with_strata(1)).unwrap();
            let z = (e.value - exact) / e.stderr;
            z2 += z * z;
            if z.abs() > 3.0 {
                outside += 1;
            }
        }
        assert!(outside <= 2, "{outside} of 50 beyond 3 stderr");
        // chi-square with 50 dof: 1% upper quantile is 76.15
        assert!(z2 < 76.15, "chi2 = {z2}");
    }

    #[test]
    fn body_integrals() {
        let disc = ConvexBody::unit_ball(2);
        let plan = IntegrationPlan::monte_carlo(100_000, 3, 4);
        let e = integrate_body(|_| 1.0, &disc, &plan).unwrap();
        assert!((e.value - PI).abs() <= 3.0 * e.stderr + 1e-12);
        let e = integrate_body(|y| y[0] * y[0], &interval(), &plan).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() <= 3.0 * e.stderr);
        let e = integrate_body(|y| y[0].powi(3) + y[0], &interval(), &plan).unwrap();
        assert!(e.value.abs() <= 3.0 * e.stderr);
        let q = integrate_body(|y| y[0] * y[0], &interval(), &IntegrationPlan::quadrature(8)).unwrap();
        assert_relative_eq!(q.value, 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn polytope_volume_from_acceptance_rate() {
        let diamond = ConvexBody::new(BodyKind::Polytope {
            normals: vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]],
            offsets: vec![1.0; 4],
        })
        .unwrap();
        let e = integrate_body(|_| 1.0, &diamond, &IntegrationPlan::monte_carlo(200_000, 8, 4)).unwrap();
        assert!(e.stderr > 0.0);
        assert!((e.value - 2.0).abs() <= 4.0 * e.stderr);
    }

    #[test]
    fn sphere_body_identity_examples() {
        let plan = IntegrationPlan::quadrature(16);
        let g1 = sphere_body_identity_check(|s| s[0], &interval(), 1, 2.0, &plan).unwrap();
        assert_relative_eq!(g1.lhs, 2.0, epsilon = 1e-12);
        assert_relative_eq!(g1.rhs, 2.0, epsilon = 1e-12);
        assert!(g1.rel_gap <= 1e-3);
        let g2 = sphere_body_identity_check(|s| s[0], &ConvexBody::unit_ball(2), 1, 2.0, &plan).unwrap();
        assert_relative_eq!(g2.lhs, PI, max_relative = 1e-10);
        assert_relative_eq!(g2.rhs, PI, max_relative = 1e-10);
        let g0 = sphere_body_identity_check(|_| 0.0, &interval(), 1, 2.0, &plan).unwrap();
        assert_eq!((g0.lhs, g0.rhs, g0.rel_gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mollifier_law_matches_density() {
        let fam = MollifierFamily::new(MollifierKind::Fractional { p: 2.0 }, 2, 0.3).unwrap();
        let law = RadialLaw::Mollifier { family: fam, stretch: 0.5 };
        // the density is the derivative of the inverse of inverse_cdf
        for u in [0.1, 0.4, 0.8] {
            let du = 1e-6;
            let (t0, t1) = (law.inverse_cdf(u), law.inverse_cdf(u + du));
            let d = law.density(0.5 * (t0 + t1));
            assert_relative_eq!(d * (t1 - t0), du, max_relative = 1e-5);
        }
        assert_relative_eq!(law.inverse_cdf(1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn power_law_inverse_cdf() {
        for exponent in [0.5, 1.0, 3.0, 9.0] {
            let law = RadialLaw::PowerLaw { exponent, lo: 1e-3, hi: 10.0 };
            assert_relative_eq!(law.inverse_cdf(0.0), 1e-3, max_relative = 1e-12);
            assert_relative_eq!(law.inverse_cdf(1.0), 10.0, max_relative = 1e-12);
            // CDF at the median by quadrature of the density
            let t = law.inverse_cdf(0.5);
            let gl = GaussLegendre::new(30);
            let lo_mass: f64 = composite(1e-3f64.ln(), t.ln(), 40, &gl)
                .iter()
                .map(|&(s, w)| w * s.exp() * law.density(s.exp()))
                .sum();
            assert_relative_eq!(lo_mass, 0.5, max_relative = 1e-9);
        }
    }
}
