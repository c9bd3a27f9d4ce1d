//! Parameter sweeps toward zero and limit extrapolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{evaluate, local_limit, FunctionalSpec, Theorem};
use crate::integrate::IntegrationPlan;

/// Geometric grid `start · ratio^i`, `i = 0..points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub start: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_ratio() -> f64 {
    0.5
}

fn default_points() -> usize {
    7
}

impl Schedule {
    pub fn new(start: f64, ratio: f64, points: usize) -> Result<Self> {
        let s = Self {
            start,
            ratio,
            points,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.start > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "schedule start must be positive, got {}",
                self.start
            )));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "schedule ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if self.points < 4 {
            return Err(Error::InvalidParameter(format!(
                "schedule needs at least 4 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn parameters(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start * self.ratio.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Least-squares fit of `value ≈ limit + coeff · parameter^rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub limit: f64,
    pub coeff: f64,
    pub rate: f64,
    /// Propagated from the point stderrs at fixed rate, floored at the
    /// smallest point stderr.
    pub limit_stderr: f64,
}

pub const RATE_RANGE: (f64, f64) = (0.2, 2.0);

/// Intercept and slope of `v ≈ a + b·x` with the intercept's weights.
fn linear_fit(x: &[f64], v: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let vm = v.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    if sxx <= f64::MIN_POSITIVE {
        return (vm, 0.0, vec![1.0 / n; x.len()]);
    }
    let sxv: f64 = x.iter().zip(v).map(|(a, b)| (a - xm) * (b - vm)).sum();
    let slope = sxv / sxx;
    let weights = x.iter().map(|a| 1.0 / n - xm * (a - xm) / sxx).collect();
    (vm - slope * xm, slope, weights)
}

fn sse(params: &[f64], values: &[f64], q: f64) -> f64 {
    let x: Vec<f64> = params.iter().map(|d| d.powf(q)).collect();
    let (a, b, _) = linear_fit(&x, values);
    x.iter()
        .zip(values)
        .map(|(xi, vi)| (vi - a - b * xi).powi(2))
        .sum()
}

/// Fits `limit + coeff · parameter^rate`, the rate by golden-section search
/// over [`RATE_RANGE`] and the other two by linear least squares.
pub fn fit_power_law(params: &[f64], values: &[f64], stderrs: &[f64]) -> Result<PowerFit> {
    if params.len() != values.len() || params.len() != stderrs.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: values.len().min(stderrs.len()),
        });
    }
    if params.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "power-law fit needs at least 3 points, got {}",
            params.len()
        )));
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = RATE_RANGE;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = sse(params, values, c);
    let mut fd = sse(params, values, d);
    while hi - lo > 1e-12 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = sse(params, values, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = sse(params, values, d);
        }
    }
    let rate = 0.5 * (lo + hi);
    let x: Vec<f64> = params.iter().map(|p| p.powf(rate)).collect();
    let (limit, coeff, weights) = linear_fit(&x, values);
    let propagated = weights
        .iter()
        .zip(stderrs)
        .map(|(w, s)| (w * s).powi(2))
        .sum::<f64>()
        .sqrt();
    let floor = stderrs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PowerFit {
        limit,
        coeff,
        rate,
        limit_stderr: propagated.max(floor),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AitkenLimit {
    pub limit: f64,
    /// Set when the second difference vanished and the last value was used.
    pub degenerate: bool,
}

/// Aitken Δ² extrapolation from the last three values.
pub fn aitken(values: &[f64]) -> Result<AitkenLimit> {
    if values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "Aitken extrapolation needs at least 3 values, got {}",
            values.len()
        )));
    }
    let k = values.len();
    let (a, b, c) = (values[k - 3], values[k - 2], values[k - 1]);
    let denom = (c - b) - (b - a);
    let scale = a.abs().max(b.abs()).max(c.abs());
    if denom.abs() <= 1e-14 * scale || !denom.is_finite() {
        return Ok(AitkenLimit {
            limit: c,
            degenerate: true,
        });
    }
    Ok(AitkenLimit {
        limit: c - (c - b).powi(2) / denom,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub theorem: Theorem,
    pub points: Vec<SweepPoint>,
    pub extrapolated_limit: f64,
    pub limit_stderr: f64,
    pub fitted_rate: f64,
    pub fitted_coeff: f64,
    pub aitken: AitkenLimit,
    pub target: f64,
    pub rel_gap: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

impl SweepResult {
    /// Fit and Aitken limits within `max(3·stderr, 1% of target)`.
    pub fn aitken_consistent(&self) -> bool {
        let tol = (3.0 * self.limit_stderr).max(0.01 * self.target.abs());
        (self.aitken.limit - self.extrapolated_limit).abs() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub tolerance: f64,
    /// Fit only the last `k` points; `None` uses all of them.
    pub fit_last: Option<usize>,
    /// Plan for the deterministic target computation.
    pub target_plan: IntegrationPlan,
}

/// Evaluates `spec` along the schedule with one plan (so every point sees
/// the same random numbers), extrapolates, and compares with the limit.
pub fn sweep(
    spec: &FunctionalSpec,
    schedule: &Schedule,
    plan: &IntegrationPlan,
    options: &SweepOptions,
) -> Result<SweepResult> {
    schedule.validate()?;
    spec.validate()?;
    let mut points = Vec::with_capacity(schedule.points);
    for parameter in schedule.parameters() {
        let est = evaluate(&spec.with_parameter(parameter), plan).map_err(|e| match e {
            Error::NonFiniteKernel { .. } => Error::NonFiniteSweep(parameter),
            other => other,
        })?;
        if !est.value.is_finite() {
            return Err(Error::NonFiniteSweep(parameter));
        }
        points.push(SweepPoint {
            parameter,
            value: est.value,
            stderr: est.stderr,
        });
    }
    let target = local_limit(spec, &options.target_plan)?;
    let mut result = summarize(spec.theorem, points, target, options)?;
    result.verdict = result.rel_gap <= options.tolerance;
    Ok(result)
}

/// Fit, Aitken and verdict for already evaluated points.
pub fn summarize(
    theorem: Theorem,
    points: Vec<SweepPoint>,
    target: f64,
    options: &SweepOptions,
) -> Result<SweepResult> {
    let k = options.fit_last.unwrap_or(points.len()).clamp(3, points.len());
    let tail = &points[points.len() - k..];
    let params: Vec<f64> = tail.iter().map(|p| p.parameter).collect();
    let values: Vec<f64> = tail.iter().map(|p| p.value).collect();
    let stderrs: Vec<f64> = tail.iter().map(|p| p.stderr).collect();
    let fit = fit_power_law(&params, &values, &stderrs)?;
    let all: Vec<f64> = points.iter().map(|p| p.value).collect();
    let aitken = aitken(&all)?;
    let rel_gap = if target == 0.0 {
        fit.limit.abs()
    } else {
        (fit.limit - target).abs() / target.abs()
    };
    Ok(SweepResult {
        theorem,
        points,
        extrapolated_limit: fit.limit,
        limit_stderr: fit.limit_stderr,
        fitted_rate: fit.rate,
        fitted_coeff: fit.coeff,
        aitken,
        target,
        rel_gap,
        tolerance: options.tolerance,
        verdict: rel_gap <= options.tolerance,
    })
}
