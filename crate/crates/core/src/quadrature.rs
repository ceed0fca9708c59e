//! Composite Gauss–Legendre quadrature over the real line for integrands made
//! of Gaussian bumps of very different widths.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess for the i-th root from the right.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
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

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[lo, hi]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let nf = n as f64;
    let d = nf * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A region where the integrand has structure: a bump of roughly standard
/// deviation `scale` around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub center: f64,
    pub scale: f64,
}

impl Feature {
    pub fn new(center: f64, scale: f64) -> Self {
        Self { center, scale }
    }
}

/// Panels per feature; each covers `halfwidth / 2` standard deviations.
const PANELS_PER_SIDE: usize = 2;

/// Breakpoints covering `center ± halfwidth·scale` for every feature.
pub fn breakpoints(features: &[Feature], halfwidth: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(features.len() * (2 * PANELS_PER_SIDE + 1));
    for ft in features {
        if !(ft.scale.is_finite() && ft.scale > 0.0 && ft.center.is_finite()) {
            continue;
        }
        let step = halfwidth * ft.scale / PANELS_PER_SIDE as f64;
        let k = PANELS_PER_SIDE as i64;
        for j in -k..=k {
            pts.push(ft.center + j as f64 * step);
        }
    }
    pts.sort_by(f64::total_cmp);
    let span = match (pts.first(), pts.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => return pts,
    };
    let eps = span * 1e-13;
    pts.dedup_by(|b, a| (*b - *a).abs() <= eps);
    pts
}

/// Integrates `f` over the union of the feature windows with `rule` on every
/// panel between consecutive breakpoints.
pub fn integrate_features<F: FnMut(f64) -> f64>(
    features: &[Feature],
    halfwidth: f64,
    rule: &GaussLegendre,
    mut f: F,
) -> f64 {
    let pts = breakpoints(features, halfwidth);
    pts.windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32, 64, 128] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert_abs_diff_eq!(got, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let rule = GaussLegendre::new(33);
        let x = rule.nodes();
        for i in 0..x.len() {
            assert_abs_diff_eq!(x[i], -x[x.len() - 1 - i], epsilon = 1e-15);
        }
        assert!(x.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn multiscale_gaussian_mass() {
        // Two normal densities with widths 1e-3 and 1e3 at different centers.
        let pdf = |x: f64, m: f64, s: f64| {
            (-(x - m) * (x - m) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
        };
        let features = [Feature::new(0.3, 1e-3), Feature::new(-5.0, 1e3)];
        let rule = GaussLegendre::new(32);
        let total = integrate_features(&features, 8.0, &rule, |x| {
            0.25 * pdf(x, 0.3, 1e-3) + 0.75 * pdf(x, -5.0, 1e3)
        });
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}
