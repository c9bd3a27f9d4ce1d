//! Radial mollifier families with unit radial mass concentrating at zero.
//!
//! Both families have closed-form radial distribution functions, which
//! makes certification exact and lets the integration engine sample the
//! radius directly from the probability law `r^{N−1} ρ_ε(r) dr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{composite, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MollifierKind {
    /// `N ε^{−N} 1_{(0,ε]}(r)`.
    Shell,
    /// `ε p r^{εp−N} 1_{(0,1]}(r)`.
    Fractional { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierFamily {
    kind: MollifierKind,
    dim: usize,
    epsilon: f64,
    /// Multiplies the profile; anything but 1 breaks normalisation.
    scale: f64,
}

impl MollifierFamily {
    pub fn new(kind: MollifierKind, dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("mollifier dimension must be >= 1".into()));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mollifier epsilon must be positive, got {epsilon}"
            )));
        }
        if let MollifierKind::Fractional { p } = kind {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fractional mollifier exponent must be positive, got {p}"
                )));
            }
        }
        Ok(Self {
            kind,
            dim,
            epsilon,
            scale: 1.0,
        })
    }

    /// Same profile multiplied by `scale`.
    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Ok(Self::new(self.kind, self.dim, epsilon)?.scaled(self.scale))
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn support_upper(&self) -> f64 {
        match self.kind {
            MollifierKind::Shell => self.epsilon,
            MollifierKind::Fractional { .. } => 1.0,
        }
    }

    fn exponent(&self) -> f64 {
        match self.kind {
            MollifierKind::Shell => self.dim as f64,
            MollifierKind::Fractional { p } => self.epsilon * p,
        }
    }

    /// `ρ_ε(r)`.
    pub fn evaluate(&self, r: f64) -> f64 {
        if !(r > 0.0) || r > self.support_upper() {
            return 0.0;
        }
        let n = self.dim as f64;
        self.scale
            * match self.kind {
                MollifierKind::Shell => n * self.epsilon.powf(-n),
                MollifierKind::Fractional { p } => {
                    let ep = self.epsilon * p;
                    ep * r.powf(ep - n)
                }
            }
    }

    /// `∫_0^r s^{N−1} ρ_ε(s) ds` in closed form.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let top = self.support_upper();
        self.scale * (r.min(top) / top).powf(self.exponent())
    }

    /// `∫_0^∞ r^{N−1} ρ_ε(r) dr`.
    pub fn total_mass(&self) -> f64 {
        self.scale
    }

    /// `∫_δ^∞ r^{N−1} ρ_ε(r) dr` in closed form.
    pub fn tail_mass(&self, delta: f64) -> f64 {
        if delta >= self.support_upper() {
            return 0.0;
        }
        let top = self.support_upper();
        // 1 − (δ/top)^a, written to keep relative accuracy for small a.
        let a = self.exponent();
        -self.scale * (a * (delta / top).ln()).exp_m1()
    }

    /// Radius with radial mass `u ∈ [0, 1]` below it (normalised law).
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let r = self.support_upper() * u.powf(1.0 / self.exponent());
        r.max(f64::MIN_POSITIVE)
    }

    /// Density of the normalised radial law `r^{N−1} ρ_ε(r) / mass`.
    pub fn radial_density(&self, r: f64) -> f64 {
        r.powi(self.dim as i32 - 1) * self.evaluate(r) / self.total_mass()
    }

    /// `∫_a^{top} r^{N−1} ρ_ε(r) dr` by Gauss–Legendre after `r = top·e^{−s}`,
    /// which turns the algebraic singularity at 0 into exponential decay.
    pub fn numeric_mass_above(&self, a: f64) -> f64 {
        let top = self.support_upper();
        if a >= top {
            return 0.0;
        }
        let rate = self.exponent();
        let s_max = if a > 0.0 {
            (top / a).ln()
        } else {
            // the integrand in s is rate·e^{−rate·s}; truncate at e^{−80}
            80.0 / rate
        };
        let gl = GaussLegendre::new(20);
        composite(0.0, s_max, 200, &gl)
            .into_iter()
            .map(|(s, w)| w * self.log_radial(top.ln() - s).exp())
            .sum()
    }

    /// `ln(r^N ρ_ε(r))` with the powers of `r` combined before evaluation,
    /// so that nothing cancels when `ln r` is large.
    pub fn log_radial(&self, ln_r: f64) -> f64 {
        if ln_r > self.support_upper().ln() {
            return f64::NEG_INFINITY;
        }
        let n = self.dim as f64;
        self.scale.ln()
            + match self.kind {
                MollifierKind::Shell => n.ln() - n * self.epsilon.ln() + n * ln_r,
                MollifierKind::Fractional { p } => {
                    let ep = self.epsilon * p;
                    ep.ln() + ep * ln_r
                }
            }
    }

    /// `ln ρ_ε(r)` as a function of `ln r`, usable far below the smallest
    /// positive double.
    pub fn log_evaluate(&self, ln_r: f64) -> f64 {
        if ln_r > self.support_upper().ln() {
            return f64::NEG_INFINITY;
        }
        let n = self.dim as f64;
        self.scale.ln()
            + match self.kind {
                MollifierKind::Shell => n.ln() - n * self.epsilon.ln(),
                MollifierKind::Fractional { p } => {
                    let ep = self.epsilon * p;
                    ep.ln() + (ep - n) * ln_r
                }
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationRow {
    pub epsilon: f64,
    pub delta: f64,
    pub tail_closed: f64,
    pub tail_numeric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub family: String,
    pub max_normalization_residual: f64,
    pub max_tail_mismatch: f64,
    pub rows: Vec<CertificationRow>,
}

/// Largest allowed `|∫ r^{N−1} ρ_ε − 1|` and closed/numeric tail mismatch.
pub const CERTIFY_TOL: f64 = 1e-10;
/// Tail mass the finest `ε` must reach for every `δ`.
pub const TAIL_TARGET: f64 = 1e-3;

/// Checks unit radial mass and concentration at zero along `eps_grid`.
pub fn certify(
    family: &MollifierFamily,
    delta_grid: &[f64],
    eps_grid: &[f64],
) -> Result<CertificationReport> {
    if delta_grid.is_empty() || eps_grid.is_empty() {
        return Err(Error::InvalidParameter("certification grids must be non-empty".into()));
    }
    if delta_grid.iter().chain(eps_grid).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("certification grids must be positive".into()));
    }
    let mut eps: Vec<f64> = eps_grid.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let name = format!("{:?}(N={})", family.kind, family.dim);
    let mut report = CertificationReport {
        family: name.clone(),
        max_normalization_residual: 0.0,
        max_tail_mismatch: 0.0,
        rows: Vec::new(),
    };
    for &e in &eps {
        let fam = family.with_epsilon(e)?;
        let closed = (fam.total_mass() - 1.0).abs();
        let numeric = (fam.numeric_mass_above(0.0) - 1.0).abs();
        report.max_normalization_residual = report.max_normalization_residual.max(closed.max(numeric));
        for &d in delta_grid {
            let row = CertificationRow {
                epsilon: e,
                delta: d,
                tail_closed: fam.tail_mass(d),
                tail_numeric: fam.numeric_mass_above(d),
            };
            report.max_tail_mismatch = report
                .max_tail_mismatch
                .max((row.tail_closed - row.tail_numeric).abs());
            report.rows.push(row);
        }
    }
    if report.max_normalization_residual > CERTIFY_TOL {
        return Err(Error::Certification(format!(
            "{name}: normalization violated, residual {:.3e} > {CERTIFY_TOL:e}",
            report.max_normalization_residual
        )));
    }
    if report.max_tail_mismatch > CERTIFY_TOL {
        return Err(Error::Certification(format!(
            "{name}: tail quadrature disagrees with closed form by {:.3e}",
            report.max_tail_mismatch
        )));
    }
    for &d in delta_grid {
        let tails: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.delta == d)
            .map(|r| r.tail_closed)
            .collect();
        if tails.windows(2).any(|w| w[1] > w[0] + CERTIFY_TOL) {
            return Err(Error::Certification(format!(
                "{name}: concentration violated, tail mass not decreasing in epsilon at delta={d}"
            )));
        }
        let last = *tails.last().unwrap();
        if last > TAIL_TARGET {
            return Err(Error::Certification(format!(
                "{name}: concentration violated, tail mass {last:.3e} at delta={d} above {TAIL_TARGET:e}"
            )));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn shell(n: usize, e: f64) -> MollifierFamily {
        MollifierFamily::new(MollifierKind::Shell, n, e).unwrap()
    }

    fn frac(n: usize, e: f64, p: f64) -> MollifierFamily {
        MollifierFamily::new(MollifierKind::Fractional { p }, n, e).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(shell(1, 0.5).evaluate(0.25), 2.0);
        assert_eq!(shell(1, 0.5).evaluate(0.75), 0.0);
        assert_relative_eq!(frac(1, 0.1, 2.0).evaluate(1.0), 0.2, epsilon = 1e-15);
        assert_eq!(frac(1, 0.1, 2.0).evaluate(1.5), 0.0);
        assert_eq!(shell(2, 0.5).evaluate(0.0), 0.0);
    }

    #[test]
    fn shell_tails() {
        let tails: Vec<f64> = [0.5, 0.2, 0.05]
            .iter()
            .map(|&e| shell(1, e).tail_mass(0.1))
            .collect();
        assert_relative_eq!(tails[0], 0.8, epsilon = 1e-14);
        assert_relative_eq!(tails[1], 0.5, epsilon = 1e-14);
        assert_eq!(tails[2], 0.0);
        for (e, t) in [0.5, 0.2, 0.05].iter().zip(&tails) {
            assert!((shell(1, *e).numeric_mass_above(0.1) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_tail() {
        let f = frac(1, 0.01, 2.0);
        let closed = 1.0 - 0.5f64.powf(0.02);
        assert_relative_eq!(f.tail_mass(0.5), closed, max_relative = 1e-12);
        assert_relative_eq!(f.tail_mass(0.5), 0.0138, epsilon = 1e-4);
        assert!((f.numeric_mass_above(0.5) - closed).abs() < 1e-12);
    }

    #[test]
    fn normalization_numeric() {
        for fam in [shell(1, 0.3), shell(3, 0.01), frac(2, 0.05, 2.0), frac(1, 1e-4, 1.5)] {
            assert!((fam.numeric_mass_above(0.0) - 1.0).abs() <= 1e-10, "{fam:?}");
            assert_eq!(fam.total_mass(), 1.0);
        }
    }

    #[test]
    fn inverse_cdf_inverts() {
        for fam in [shell(2, 0.3), frac(1, 0.1, 2.0)] {
            for u in [0.01, 0.3, 0.9, 1.0] {
                assert_relative_eq!(fam.radial_cdf(fam.inverse_cdf(u)), u, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn certification() {
        let deltas = [0.5, 0.1, 0.01];
        let eps: Vec<f64> = (0..12).map(|k| 0.5 * 0.25f64.powi(k)).collect();
        let r = certify(&shell(2, 1.0), &deltas, &eps).unwrap();
        assert!(r.max_normalization_residual <= CERTIFY_TOL);
        certify(&frac(1, 1.0, 2.0), &deltas, &eps).unwrap();
        let broken = shell(1, 1.0).scaled(1.01);
        match certify(&broken, &deltas, &eps) {
            Err(Error::Certification(msg)) => assert!(msg.contains("normalization")),
            other => panic!("expected certification failure, got {other:?}"),
        }
        // a grid that stops too early never concentrates
        match certify(&frac(1, 1.0, 2.0), &deltas, &[0.1, 0.01]) {
            Err(Error::Certification(msg)) => assert!(msg.contains("concentration")),
            other => panic!("expected certification failure, got {other:?}"),
        }
        assert!(certify(&shell(1, 1.0), &[], &eps).is_err());
    }
}
