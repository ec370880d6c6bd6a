//! Gauss-Legendre rules and panel integration.
//!
//! Kernel integrands are only piecewise smooth: they kink on the diagonal
//! `t = s`. [`integrate_split`] integrates each side with its own mapped rule
//! so no quadrature panel straddles the kink.

use serde::{Deserialize, Serialize};

use crate::basis::legendre_with_derivative;
use crate::error::{Error, Result};
use crate::func::EvalFn;

pub const MAX_ORDER: usize = 64;
pub const DEFAULT_ORDER: usize = 10;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    /// Rule with `g` nodes, exact for polynomials of degree `2g - 1`.
    pub fn gauss(g: usize) -> Result<Self> {
        if g == 0 || g > MAX_ORDER {
            return Err(Error::QuadratureOrder(g));
        }
        let mut nodes = vec![0.0; g];
        let mut weights = vec![0.0; g];
        let half = g.div_ceil(2);
        for i in 0..half {
            // Chebyshev-like guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (g as f64 + 0.5)).cos();
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre_with_derivative(g, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence(format!(
                    "Legendre root {i} of degree {g}"
                )));
            }
            if g % 2 == 1 && i == half - 1 {
                x = 0.0;
            }
            let (_, dp) = legendre_with_derivative(g, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[g - 1 - i] = x;
            weights[i] = w;
            weights[g - 1 - i] = w;
        }
        Ok(QuadRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub(crate) fn sum<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        if a == b {
            return 0.0;
        }
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub(crate) fn sum_split<L, R>(&self, a: f64, b: f64, c: f64, left: L, right: R) -> f64
    where
        L: Fn(f64) -> f64,
        R: Fn(f64) -> f64,
    {
        if c <= a {
            self.sum(a, b, right)
        } else if c >= b {
            self.sum(a, b, left)
        } else {
            self.sum(a, c, left) + self.sum(c, b, right)
        }
    }
}

/// Builds the `g`-point Gauss-Legendre rule.
pub fn gauss_rule(g: usize) -> Result<QuadRule> {
    QuadRule::gauss(g)
}

/// Approximates the integral of `f` over `[a, b]`.
pub fn integrate_panel(rule: &QuadRule, a: f64, b: f64, f: &dyn EvalFn) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(rule.sum(a, b, |t| f.eval(t)))
}

/// Integrates `f_left` over `[a, c]` and `f_right` over `[c, b]`, with `c`
/// clipped to the interval.
pub fn integrate_split(
    rule: &QuadRule,
    a: f64,
    b: f64,
    c: f64,
    f_left: &dyn EvalFn,
    f_right: &dyn EvalFn,
) -> Result<f64> {
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(rule.sum_split(a, b, c, |t| f_left.eval(t), |t| f_right.eval(t)))
}
