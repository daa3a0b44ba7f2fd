//! Gauss–Legendre quadrature, fixed-order and adaptive.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
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
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes mapped to `[a, b]` with their scaled weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive bisection driven by a 15-point Gauss–Legendre rule: a panel is
/// accepted once the rule on the panel and on its two halves agree to
/// `max(abs_tol, rel_tol·|I|)` (scaled by the panel's share of the interval).
#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive::new(1e-10, 1e-12)
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Adaptive {
            rule: GaussLegendre::new(15),
            abs_tol,
            rel_tol,
            max_depth: 40,
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> Result<Integral> {
        if a == b {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let mut evals = 0usize;
        let mut eval = |lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> f64| {
            evals += self.rule.nodes.len();
            self.rule.integrate(lo, hi, f)
        };
        let whole = eval(a, b, &mut f);
        let span = (b - a).abs();
        let mut total = 0.0;
        let mut err_total = 0.0;
        // (lo, hi, estimate, depth)
        let mut stack = vec![(a, b, whole, 0u32)];
        let mut scale = whole.abs();
        while let Some((lo, hi, est, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = eval(lo, mid, &mut f);
            let right = eval(mid, hi, &mut f);
            let refined = left + right;
            let diff = (refined - est).abs();
            scale = scale.max(refined.abs());
            let share = (hi - lo).abs() / span;
            let tol = self.abs_tol.max(self.rel_tol * scale) * share;
            if !refined.is_finite() {
                return Err(Error::Accuracy(format!(
                    "non-finite integrand on [{lo}, {hi}]"
                )));
            }
            if diff <= tol || (hi - lo).abs() < 1e-15 * span {
                total += refined;
                err_total += diff;
            } else if depth >= self.max_depth {
                return Err(Error::Accuracy(format!(
                    "adaptive quadrature did not converge on [{lo}, {hi}] (refinements differ by {diff:e})"
                )));
            } else {
                stack.push((lo, mid, left, depth + 1));
                stack.push((mid, hi, right, depth + 1));
            }
        }
        Ok(Integral {
            value: total,
            error: err_total,
            evaluations: evals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_weights_sum() {
        let gl = GaussLegendre::new(200);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adaptive_handles_sharp_peak() {
        let q = Adaptive::new(1e-12, 1e-12);
        let r = q.integrate(-10.0, 10.0, |x| (-1e4 * x * x).exp()).unwrap();
        assert!((r.value - (std::f64::consts::PI / 1e4).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let mut q = Adaptive::new(1e-14, 1e-14);
        q.max_depth = 6;
        assert!(matches!(
            q.integrate(0.0, 1.0, |x| 1.0 / x.max(1e-300)),
            Err(Error::Accuracy(_))
        ));
    }
}
