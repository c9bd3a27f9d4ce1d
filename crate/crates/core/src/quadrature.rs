//! Gauss–Legendre rules, composite panels and small tensor products.

use std::f64::consts::PI;

/// An n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Composite Gauss–Legendre nodes and weights on `[a, b]`.
pub fn composite(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

/// Tensor product of one-dimensional node lists: `(point, weight)` pairs.
pub fn tensor(axes: &[Vec<(f64, f64)>]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(axes.len()), 1.0)];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (pt, w) in &out {
            for &(x, wx) in axis {
                let mut p = pt.clone();
                p.push(x);
                next.push((p, w * wx));
            }
        }
        out = next;
    }
    out
}

/// Quadrature on the unit sphere `S^{N-1}` for `N ≤ 3`.
///
/// `N = 1` is the two-point set `{−1, +1}` with counting measure, `N = 2`
/// the equispaced trapezoid rule on the circle, `N = 3` Gauss–Legendre in
/// `cos θ` times trapezoid in `φ`.
pub fn sphere_rule(dim: usize, n: usize) -> Option<Vec<(Vec<f64>, f64)>> {
    match dim {
        1 => Some(vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)]),
        2 => {
            let w = 2.0 * PI / n as f64;
            Some(
                (0..n)
                    .map(|k| {
                        let th = (k as f64 + 0.5) * w;
                        (vec![th.cos(), th.sin()], w)
                    })
                    .collect(),
            )
        }
        3 => {
            let gl = GaussLegendre::new(n);
            let nphi = 2 * n;
            let wphi = 2.0 * PI / nphi as f64;
            let mut out = Vec::with_capacity(n * nphi);
            for (&z, &wz) in gl.nodes.iter().zip(&gl.weights) {
                let s = (1.0 - z * z).sqrt();
                for k in 0..nphi {
                    let ph = (k as f64 + 0.5) * wphi;
                    out.push((vec![s * ph.cos(), s * ph.sin(), z], wz * wphi));
                }
            }
            Some(out)
        }
        _ => None,
    }
}

/// Surface area of `S^{N-1}`; `2` for `N = 1` (counting measure).
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(n / 2.0) / statrs::function::gamma::gamma(n / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..12 {
            let gl = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 32, 64, 128] {
            let s: f64 = GaussLegendre::new(n).weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn composite_gaussian() {
        let gl = GaussLegendre::new(8);
        let s: f64 = composite(-8.0, 8.0, 16, &gl)
            .iter()
            .map(|&(x, w)| w * (-x * x).exp())
            .sum();
        assert_relative_eq!(s, PI.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn sphere_rules_match_area() {
        for d in 1..=3 {
            let s: f64 = sphere_rule(d, 16).unwrap().iter().map(|p| p.1).sum();
            assert_relative_eq!(s, sphere_area(d), epsilon = 1e-12);
        }
    }

    #[test]
    fn tensor_box_volume() {
        let gl = GaussLegendre::new(3);
        let ax = composite(-1.0, 2.0, 2, &gl);
        let nodes = tensor(&[ax.clone(), ax]);
        let v: f64 = nodes.iter().map(|p| p.1).sum();
        assert_relative_eq!(v, 9.0, epsilon = 1e-13);
    }
}
