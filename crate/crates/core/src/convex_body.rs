//! Origin-symmetric convex bodies and their Minkowski gauges.
//!
//! A body `K` is represented by its gauge `‖x‖_K = inf{λ > 0 : x/λ ∈ K}`,
//! which is a norm whose closed unit ball is `K`. Every kind carries the
//! radii of the largest inscribed and smallest circumscribed Euclidean balls,
//! so that `|x|/outer ≤ ‖x‖_K ≤ |x|/inner`.

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::calculus::MultiIndex;
use crate::error::{Error, Result};
use crate::integrate::{integrate_body, IntegrationPlan};
use crate::quadrature::{composite, sphere_rule, tensor, GaussLegendre};

/// Declarative description of a body, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyKind {
    Ball {
        dim: usize,
        #[serde(default = "unit")]
        radius: f64,
    },
    Box {
        half_widths: Vec<f64>,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
    LpBall {
        dim: usize,
        exponent: f64,
        #[serde(default = "unit")]
        radius: f64,
    },
    /// Facets `⟨n_i, x⟩ ≤ b_i`; the facet set must be closed under negation.
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    kind: BodyKind,
    dim: usize,
    inner_radius: f64,
    outer_radius: f64,
    /// Half-widths of the tightest axis-aligned box containing the body.
    half_extent: Vec<f64>,
    /// Facet functionals `n_i / b_i` (polytopes only).
    facets: Vec<Vec<f64>>,
}

impl ConvexBody {
    pub fn new(kind: BodyKind) -> Result<Self> {
        match &kind {
            BodyKind::Ball { dim, radius } => {
                check_dim(*dim)?;
                check_positive("radius", *radius)?;
                Ok(Self::assemble(kind.clone(), *dim, *radius, *radius, vec![*radius; *dim]))
            }
            BodyKind::Box { half_widths } => {
                check_dim(half_widths.len())?;
                for &h in half_widths {
                    check_positive("half width", h)?;
                }
                let inner = half_widths.iter().cloned().fold(f64::INFINITY, f64::min);
                let outer = half_widths.iter().map(|h| h * h).sum::<f64>().sqrt();
                let dim = half_widths.len();
                let hw = half_widths.clone();
                Ok(Self::assemble(kind, dim, inner, outer, hw))
            }
            BodyKind::Ellipsoid { semi_axes } => {
                check_dim(semi_axes.len())?;
                for &a in semi_axes {
                    check_positive("semi-axis", a)?;
                }
                let inner = semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
                let outer = semi_axes.iter().cloned().fold(0.0, f64::max);
                let dim = semi_axes.len();
                let hw = semi_axes.clone();
                Ok(Self::assemble(kind, dim, inner, outer, hw))
            }
            BodyKind::LpBall {
                dim,
                exponent,
                radius,
            } => {
                check_dim(*dim)?;
                check_positive("radius", *radius)?;
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    return Err(Error::InvalidBody(format!(
                        "lp_ball exponent must be a finite q >= 1, got {exponent}"
                    )));
                }
                // On the Euclidean unit sphere ‖x‖_q ranges over
                // [min(1, N^{1/q-1/2}), max(1, N^{1/q-1/2})].
                let c = (*dim as f64).powf(1.0 / exponent - 0.5);
                let inner = radius / c.max(1.0);
                let outer = radius / c.min(1.0);
                Ok(Self::assemble(kind.clone(), *dim, inner, outer, vec![*radius; *dim]))
            }
            BodyKind::Polytope { normals, offsets } => Self::polytope(normals, offsets),
        }
    }

    fn assemble(
        kind: BodyKind,
        dim: usize,
        inner: f64,
        outer: f64,
        half_extent: Vec<f64>,
    ) -> Self {
        Self {
            kind,
            dim,
            inner_radius: inner,
            outer_radius: outer,
            half_extent,
            facets: Vec::new(),
        }
    }

    fn polytope(normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(Error::InvalidBody(
                "polytope needs one offset per facet normal".into(),
            ));
        }
        let dim = normals[0].len();
        check_dim(dim)?;
        let mut facets = Vec::with_capacity(normals.len());
        for (n, &b) in normals.iter().zip(offsets) {
            if n.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: n.len(),
                });
            }
            check_positive("facet offset", b)?;
            if norm(n) == 0.0 {
                return Err(Error::InvalidBody("zero facet normal".into()));
            }
            facets.push(n.iter().map(|v| v / b).collect::<Vec<f64>>());
        }
        for a in &facets {
            let closed = facets.iter().any(|c| {
                c.iter()
                    .zip(a)
                    .all(|(ci, ai)| (ci + ai).abs() <= 1e-12 * (1.0 + ai.abs()))
            });
            if !closed {
                return Err(Error::InvalidBody(format!(
                    "polytope is not origin-symmetric: no facet opposite to {a:?}"
                )));
            }
        }
        let rank = DMatrix::from_fn(facets.len(), dim, |i, j| facets[i][j]).rank(1e-12);
        if rank < dim {
            return Err(Error::InvalidBody("polytope is unbounded".into()));
        }

        // Vertices: solve every N-subset of active facets and keep feasible points.
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for subset in (0..facets.len()).combinations(dim) {
            let a = DMatrix::from_fn(dim, dim, |i, j| facets[subset[i]][j]);
            let Some(sol) = a.lu().solve(&DVector::from_element(dim, 1.0)) else {
                continue;
            };
            let v: Vec<f64> = sol.iter().cloned().collect();
            if !v.iter().all(|c| c.is_finite()) {
                continue;
            }
            let g = facets.iter().map(|f| dot(f, &v)).fold(f64::NEG_INFINITY, f64::max);
            if g <= 1.0 + 1e-9 {
                vertices.push(v);
            }
        }
        if vertices.is_empty() {
            return Err(Error::InvalidBody("polytope has no vertices".into()));
        }
        let outer = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let inner = facets
            .iter()
            .map(|f| 1.0 / norm(f))
            .fold(f64::INFINITY, f64::min);
        let half_extent = (0..dim)
            .map(|k| vertices.iter().map(|v| v[k].abs()).fold(0.0, f64::max))
            .collect();
        Ok(Self {
            kind: BodyKind::Polytope {
                normals: normals.to_vec(),
                offsets: offsets.to_vec(),
            },
            dim,
            inner_radius: inner,
            outer_radius: outer,
            half_extent,
            facets,
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::new(BodyKind::Ball { dim, radius: 1.0 }).expect("valid dimension")
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn half_extent(&self) -> &[f64] {
        &self.half_extent
    }

    /// Short human-readable descriptor used in reports.
    pub fn descriptor(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        match &self.kind {
            BodyKind::Ball { dim, radius } => format!("ball(N={dim};r={radius})"),
            BodyKind::Box { half_widths } => format!("box({})", list(half_widths)),
            BodyKind::Ellipsoid { semi_axes } => format!("ellipsoid({})", list(semi_axes)),
            BodyKind::LpBall {
                dim,
                exponent,
                radius,
            } => format!("lp_ball(N={dim};q={exponent};r={radius})"),
            BodyKind::Polytope { offsets, .. } => {
                format!("polytope(N={};facets={})", self.dim, offsets.len())
            }
        }
    }

    /// `‖x‖_K`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.gauge_unchecked(x))
    }

    /// Gauge without the dimension check; callers guarantee `x.len() == dim`.
    pub fn gauge_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::Ball { radius, .. } => norm(x) / radius,
            BodyKind::Box { half_widths } => x
                .iter()
                .zip(half_widths)
                .map(|(v, h)| (v / h).abs())
                .fold(0.0, f64::max),
            BodyKind::Ellipsoid { semi_axes } => x
                .iter()
                .zip(semi_axes)
                .map(|(v, a)| (v / a) * (v / a))
                .sum::<f64>()
                .sqrt(),
            BodyKind::LpBall {
                exponent, radius, ..
            } => {
                let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if amax == 0.0 {
                    return 0.0;
                }
                let s: f64 = x.iter().map(|v| (v.abs() / amax).powf(*exponent)).sum();
                amax * s.powf(1.0 / exponent) / radius
            }
            BodyKind::Polytope { .. } => self
                .facets
                .iter()
                .map(|f| dot(f, x))
                .fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.gauge(x)? <= 1.0)
    }

    /// `(A, B)` with `A|x| ≤ ‖x‖_K ≤ B|x|`.
    pub fn equivalence_constants(&self) -> (f64, f64) {
        (1.0 / self.outer_radius, 1.0 / self.inner_radius)
    }

    /// Lebesgue measure in closed form; `None` for polytopes.
    pub fn volume(&self) -> Option<f64> {
        let n = self.dim as f64;
        let unit_ball = PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0);
        match &self.kind {
            BodyKind::Ball { radius, .. } => Some(unit_ball * radius.powi(self.dim as i32)),
            BodyKind::Box { half_widths } => Some(half_widths.iter().map(|h| 2.0 * h).product()),
            BodyKind::Ellipsoid { semi_axes } => Some(unit_ball * semi_axes.iter().product::<f64>()),
            BodyKind::LpBall {
                exponent, radius, ..
            } => Some(
                (2.0 * gamma(1.0 + 1.0 / exponent)).powf(n) / gamma(1.0 + n / exponent)
                    * radius.powf(n),
            ),
            BodyKind::Polytope { .. } => None,
        }
    }

    /// Volume of the bounding box used by rejection sampling.
    pub fn bounding_box_volume(&self) -> f64 {
        self.half_extent.iter().map(|h| 2.0 * h).product()
    }

    /// Uniform point by rejection from the bounding box; also returns the
    /// number of proposals used. The expected proposal count is
    /// `bounding_box_volume() / vol(K)`, at most `(2·outer)^N / vol(K)`.
    pub fn sample_by_rejection<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, u64) {
        let mut attempts = 0;
        loop {
            attempts += 1;
            let x: Vec<f64> = self
                .half_extent
                .iter()
                .map(|&h| rng.random_range(-h..=h))
                .collect();
            if self.gauge_unchecked(&x) <= 1.0 {
                return (x, attempts);
            }
        }
    }

    /// Uniform point in `K`. Balls and ellipsoids use the exact polar
    /// method, everything else rejection sampling.
    pub fn sample_in_body<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let axes: Vec<f64> = match &self.kind {
            BodyKind::Ball { dim, radius } => vec![*radius; *dim],
            BodyKind::Ellipsoid { semi_axes } => semi_axes.clone(),
            _ => return self.sample_by_rejection(rng).0,
        };
        let dir = random_direction(self.dim, rng);
        let r = rng.random::<f64>().powf(1.0 / self.dim as f64);
        dir.iter().zip(&axes).map(|(d, a)| d * r * a).collect()
    }

    /// Deterministic `(point, weight)` rule for `∫_K g(y) dy`.
    ///
    /// Boxes use tensor Gauss–Legendre; balls and ellipsoids a smooth map
    /// from a reference cell (`y_1 = a sin φ`, `y_2 = b s cos φ` in the
    /// plane, spherical coordinates in space). Other kinds fall back to
    /// gauge-polar coordinates `y = rσ`, `0 ≤ r ≤ 1/‖σ‖_K`.
    pub fn quadrature_rule(&self, nodes: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        let n = nodes.max(1);
        let gl = GaussLegendre::new(n);
        match &self.kind {
            BodyKind::Box { half_widths } => {
                let axes: Vec<_> = half_widths
                    .iter()
                    .map(|&h| composite(-h, h, 1, &gl))
                    .collect();
                Ok(tensor(&axes))
            }
            BodyKind::Ball { .. } | BodyKind::Ellipsoid { .. } => {
                let a = self.half_extent.clone();
                match self.dim {
                    1 => Ok(composite(-a[0], a[0], 1, &gl)
                        .into_iter()
                        .map(|(x, w)| (vec![x], w))
                        .collect()),
                    2 => {
                        let phis = composite(-PI / 2.0, PI / 2.0, 1, &gl);
                        let ss = composite(-1.0, 1.0, 1, &gl);
                        let mut out = Vec::with_capacity(n * n);
                        for &(phi, wp) in &phis {
                            let c = phi.cos();
                            for &(s, ws) in &ss {
                                out.push((
                                    vec![a[0] * phi.sin(), a[1] * s * c],
                                    wp * ws * a[0] * a[1] * c * c,
                                ));
                            }
                        }
                        Ok(out)
                    }
                    3 => {
                        let rs = composite(0.0, 1.0, 1, &gl);
                        let sph = sphere_rule(3, n).expect("dim 3");
                        let mut out = Vec::with_capacity(rs.len() * sph.len());
                        let vol = a[0] * a[1] * a[2];
                        for &(r, wr) in &rs {
                            for (s, ws) in &sph {
                                out.push((
                                    vec![a[0] * r * s[0], a[1] * r * s[1], a[2] * r * s[2]],
                                    wr * ws * r * r * vol,
                                ));
                            }
                        }
                        Ok(out)
                    }
                    d => Err(Error::Unsupported(format!(
                        "body quadrature in dimension {d}"
                    ))),
                }
            }
            BodyKind::LpBall { .. } | BodyKind::Polytope { .. } => {
                let sph = sphere_rule(self.dim, 32 * n).ok_or_else(|| {
                    Error::Unsupported(format!("body quadrature in dimension {}", self.dim))
                })?;
                let mut out = Vec::new();
                for (s, ws) in &sph {
                    let rmax = 1.0 / self.gauge_unchecked(s);
                    for (r, wr) in composite(0.0, rmax, 1, &gl) {
                        let y = s.iter().map(|c| c * r).collect();
                        out.push((y, ws * wr * r.powi(self.dim as i32 - 1)));
                    }
                }
                Ok(out)
            }
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// The `Z*_{p,m}K` norm of a vector of m-th order coefficients.
///
/// `coeffs[k]` belongs to the k-th multi-index of order `m` in
/// lexicographic order. The form is expanded with multinomial weights,
/// `Σ_α (m!/α!) c_α y^α`, so that feeding `(∂^α f(x))_α` reproduces
/// `D^m f(x)(y, …, y)`, and the normalisation is `(N+mp)/(m^{mp+1} p)`.
pub fn zpm_norm(
    body: &ConvexBody,
    coeffs: &[f64],
    m: usize,
    p: f64,
    plan: &IntegrationPlan,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let indices = MultiIndex::of_order(body.dim(), m);
    if coeffs.len() != indices.len() {
        return Err(Error::DimensionMismatch {
            expected: indices.len(),
            got: coeffs.len(),
        });
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let weights: Vec<f64> = indices.iter().map(|a| a.multinomial()).collect();
    let integral = integrate_body(
        |y: &[f64]| {
            let form: f64 = indices
                .iter()
                .zip(coeffs)
                .zip(&weights)
                .map(|((a, c), w)| c * w * a.monomial(y))
                .sum();
            form.abs().powf(p)
        },
        body,
        plan,
    )?
    .value;
    let n = body.dim() as f64;
    let mf = m as f64;
    let constant = (n + mf * p) / (mf.powf(mf * p + 1.0) * p);
    Ok((constant * integral).powf(1.0 / p))
}

pub fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm(&v);
        if r > 1e-300 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 4 {
        return Err(Error::InvalidBody(format!(
            "dimension must be in 1..=4, got {dim}"
        )));
    }
    Ok(())
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidBody(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Method;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn interval() -> ConvexBody {
        ConvexBody::new(BodyKind::Box {
            half_widths: vec![1.0],
        })
        .unwrap()
    }

    fn square() -> ConvexBody {
        ConvexBody::new(BodyKind::Box {
            half_widths: vec![1.0, 1.0],
        })
        .unwrap()
    }

    fn ellipse() -> ConvexBody {
        ConvexBody::new(BodyKind::Ellipsoid {
            semi_axes: vec![2.0, 1.0],
        })
        .unwrap()
    }

    fn hexagon() -> ConvexBody {
        let mut normals = Vec::new();
        for k in 0..6 {
            let th = k as f64 * PI / 3.0;
            normals.push(vec![th.cos(), th.sin()]);
        }
        ConvexBody::new(BodyKind::Polytope {
            normals,
            offsets: vec![1.0; 6],
        })
        .unwrap()
    }

    fn suite() -> Vec<ConvexBody> {
        vec![
            ConvexBody::unit_ball(2),
            square(),
            ellipse(),
            ConvexBody::new(BodyKind::LpBall {
                dim: 2,
                exponent: 3.0,
                radius: 1.5,
            })
            .unwrap(),
            ConvexBody::new(BodyKind::LpBall {
                dim: 3,
                exponent: 1.0,
                radius: 1.0,
            })
            .unwrap(),
            hexagon(),
        ]
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(ConvexBody::unit_ball(2).gauge(&[2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(square().gauge(&[2.0, 1.0]).unwrap(), 2.0);
        assert_eq!(ellipse().gauge(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ellipse().gauge(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gauge_rejects_dimension_mismatch() {
        assert!(matches!(
            square().gauge(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(square().contains(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn asymmetric_polytope_is_rejected() {
        let err = ConvexBody::new(BodyKind::Polytope {
            normals: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            offsets: vec![1.0, 2.0, 1.0, 1.0],
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidBody(_)));
    }

    #[test]
    fn unbounded_polytope_is_rejected() {
        let err = ConvexBody::new(BodyKind::Polytope {
            normals: vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            offsets: vec![1.0, 1.0],
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidBody(_)));
    }

    #[test]
    fn contains_examples() {
        let ball = ConvexBody::unit_ball(2);
        assert!(ball.contains(&[0.0, 0.0]).unwrap());
        assert!(ball.contains(&[1.0, 0.0]).unwrap());
        assert!(!square().contains(&[1.5, 0.0]).unwrap());
    }

    #[test]
    fn equivalence_constant_examples() {
        assert_eq!(ConvexBody::unit_ball(2).equivalence_constants(), (1.0, 1.0));
        let (a, b) = square().equivalence_constants();
        assert_relative_eq!(a, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b, 1.0);
        assert_eq!(ellipse().equivalence_constants(), (0.5, 1.0));
    }

    #[test]
    fn equivalence_constants_match_direction_sweep() {
        // Oracle: extremes of 1/‖σ‖_K over a dense circle of directions.
        for body in suite().into_iter().filter(|b| b.dim() == 2) {
            let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
            let n = 200_000;
            for k in 0..n {
                let th = 2.0 * PI * k as f64 / n as f64;
                let r = 1.0 / body.gauge_unchecked(&[th.cos(), th.sin()]);
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
            let (a, b) = body.equivalence_constants();
            assert_relative_eq!(1.0 / rmax, a, max_relative = 1e-6);
            assert_relative_eq!(1.0 / rmin, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn polytope_radii() {
        let hex = hexagon();
        assert_relative_eq!(hex.inner_radius(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(hex.outer_radius(), 2.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn sampling_moments_on_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = interval();
        let n = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = k.sample_in_body(&mut rng)[0];
            s1 += x;
            s2 += x * x;
        }
        assert!((s1 / n as f64).abs() < 0.01);
        assert!((s2 / n as f64 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn disc_acceptance_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let disc = ConvexBody::unit_ball(2);
        let n = 100_000;
        let attempts: u64 = (0..n).map(|_| disc.sample_by_rejection(&mut rng).1).sum();
        assert!((n as f64 / attempts as f64 - PI / 4.0).abs() < 0.01);
    }

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for body in suite() {
            for _ in 0..2000 {
                let y = body.sample_in_body(&mut rng);
                assert!(body.gauge_unchecked(&y) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_volumes() {
        for body in suite() {
            let Some(vol) = body.volume() else { continue };
            let rule = body.quadrature_rule(24).unwrap();
            let q: f64 = rule.iter().map(|p| p.1).sum();
            assert_relative_eq!(q, vol, max_relative = 1e-5);
        }
        let hex = hexagon();
        let area: f64 = hex.quadrature_rule(16).unwrap().iter().map(|p| p.1).sum();
        assert_relative_eq!(area, 2.0 * 3f64.sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn zpm_norm_examples() {
        let plan = IntegrationPlan::quadrature(32);
        let k = interval();
        assert_relative_eq!(zpm_norm(&k, &[1.0], 1, 2.0, &plan).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            zpm_norm(&k, &[1.0], 2, 2.0, &plan).unwrap(),
            1.0 / (4.0 * 2f64.sqrt()),
            epsilon = 1e-12
        );
        assert_eq!(zpm_norm(&ellipse(), &[0.0, 0.0], 1, 2.0, &plan).unwrap(), 0.0);
        assert!(zpm_norm(&k, &[1.0], 1, 0.5, &plan).is_err());
        assert!(zpm_norm(&k, &[1.0, 2.0], 1, 2.0, &plan).is_err());
    }

    #[test]
    fn zpm_norm_is_a_norm_on_the_plane() {
        let plan = IntegrationPlan::quadrature(24);
        let k = ellipse();
        let u = [0.3, -1.2, 0.7];
        let v = [-0.4, 0.5, 2.0];
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let nu = zpm_norm(&k, &u, 2, 3.0, &plan).unwrap();
        let nv = zpm_norm(&k, &v, 2, 3.0, &plan).unwrap();
        let nw = zpm_norm(&k, &w, 2, 3.0, &plan).unwrap();
        assert!(nw <= nu + nv + 1e-12);
        let scaled: Vec<f64> = u.iter().map(|a| -2.5 * a).collect();
        assert_relative_eq!(
            zpm_norm(&k, &scaled, 2, 3.0, &plan).unwrap(),
            2.5 * nu,
            max_relative = 1e-12
        );
        assert!(matches!(plan.method, Method::Quadrature { .. }));
    }

    fn arb_point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, dim)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gauge_is_homogeneous_and_symmetric(x in arb_point(2), lambda in 0.0f64..20.0, which in 0usize..6) {
            let bodies = suite();
            let body = bodies.iter().filter(|b| b.dim() == 2).nth(which % 5).unwrap();
            let g = body.gauge_unchecked(&x);
            let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let gl = body.gauge_unchecked(&lx);
            prop_assert!((gl - lambda * g).abs() <= 1e-12 * gl.max(1e-300));
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert!((body.gauge_unchecked(&neg) - g).abs() <= 1e-12 * g.max(1.0));
        }

        #[test]
        fn gauge_triangle_and_sandwich(x in arb_point(2), y in arb_point(2), which in 0usize..5) {
            let bodies = suite();
            let body = bodies.iter().filter(|b| b.dim() == 2).nth(which).unwrap();
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(body.gauge_unchecked(&s) <= body.gauge_unchecked(&x) + body.gauge_unchecked(&y) + 1e-12);
            let (a, b) = body.equivalence_constants();
            let g = body.gauge_unchecked(&x);
            let r = norm(&x);
            prop_assert!(a * r <= g * (1.0 + 1e-12) + 1e-300);
            prop_assert!(g <= b * r * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn contains_agrees_with_gauge(x in arb_point(3)) {
            let body = ConvexBody::new(BodyKind::LpBall { dim: 3, exponent: 1.0, radius: 1.0 }).unwrap();
            let g = body.gauge_unchecked(&x);
            prop_assume!((g - 1.0).abs() > 1e-9);
            prop_assert_eq!(body.contains(&x).unwrap(), g < 1.0);
        }
    }
}
