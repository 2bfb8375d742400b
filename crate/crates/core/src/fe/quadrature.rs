//! Gauss rules on the reference edge `[0, 1]` and the reference triangle
//! `(0,0), (1,0), (0,1)`.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules. They are not the most economical rules available, but every
//! weight is positive and any exactness order up to [`MAX_ORDER`] is
//! available, which is what the convergence studies at `k = 3` need.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// Highest polynomial exactness order offered by [`edge_rule`] and
/// [`triangle_rule`].
pub const MAX_ORDER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("quadrature order {requested} exceeds the implemented maximum {max}")]
pub struct OrderTooHigh {
    pub requested: usize,
    pub max: usize,
}

/// Points and weights of a quadrature rule on a `D`-dimensional reference
/// domain. Weights sum to the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl<const D: usize> QuadRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; D], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64; D]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` with `n` points.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi's initial guess, then Newton on P_n.
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
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of degree `order`.
pub fn edge_rule(order: usize) -> Result<QuadRule<1>, OrderTooHigh> {
    if order > MAX_ORDER {
        return Err(OrderTooHigh { requested: order, max: MAX_ORDER });
    }
    let n = order / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(QuadRule {
        points: x.iter().map(|&t| [0.5 * (t + 1.0)]).collect(),
        weights: w.iter().map(|&w| 0.5 * w).collect(),
        order,
    })
}

/// Collapsed Gauss rule on the reference triangle exact for polynomials of
/// total degree `order`.
pub fn triangle_rule(order: usize) -> Result<QuadRule<2>, OrderTooHigh> {
    if order > MAX_ORDER {
        return Err(OrderTooHigh { requested: order, max: MAX_ORDER });
    }
    // x = u (1 - v), y = v, Jacobian (1 - v): degree `order` in u, `order + 1` in v.
    let nu = order / 2 + 1;
    let nv = (order + 1) / 2 + 1;
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&tv, &sv) in xv.iter().zip(&wv) {
        let v = 0.5 * (tv + 1.0);
        for (&tu, &su) in xu.iter().zip(&wu) {
            let u = 0.5 * (tu + 1.0);
            points.push([u * (1.0 - v), v]);
            weights.push(0.25 * su * sv * (1.0 - v));
        }
    }
    Ok(QuadRule { points, weights, order })
}
