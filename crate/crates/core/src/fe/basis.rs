//! Orthonormal, hierarchical polynomial bases on the reference triangle and
//! the reference edge.
//!
//! The triangle basis is obtained by Gram-Schmidt (two passes) on monomials
//! centred at the barycentre, taken in order of increasing total degree. The
//! first `dim_pk(j)` functions of a degree-`k` basis therefore span `P_j` for
//! every `j <= k`, which lets the degree-`k+1` velocity basis share its
//! leading block with the degree-`k` bases.

use alloc::vec;
use alloc::vec::Vec;

use super::quadrature::triangle_rule;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Triangle,
    Edge,
}

/// Dimension of `P_k` on a triangle or an edge.
pub fn dim_pk(k: usize, domain: Domain) -> usize {
    match domain {
        Domain::Triangle => (k + 1) * (k + 2) / 2,
        Domain::Edge => k + 1,
    }
}

const CENTRE: f64 = 1.0 / 3.0;

/// `P_k` on the reference triangle, orthonormal in `L2` of the reference
/// element (area 1/2).
#[derive(Debug, Clone)]
pub struct TriangleBasis {
    degree: usize,
    exponents: Vec<(usize, usize)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<f64>,
}

impl TriangleBasis {
    /// Panics if `degree > 9`.
    pub fn new(degree: usize) -> Self {
        assert!(degree <= 9, "triangle basis degree {degree} not supported");
        let n = dim_pk(degree, Domain::Triangle);
        let mut exponents = Vec::with_capacity(n);
        for d in 0..=degree {
            for b in 0..=d {
                exponents.push((d - b, b));
            }
        }
        let rule = triangle_rule(2 * degree + 2).expect("basis degree within quadrature table");
        let npts = rule.len();

        // Columns: monomial values at the quadrature points.
        let mono = |p: &[f64; 2], (a, b): (usize, usize)| {
            (p[0] - CENTRE).powi(a as i32) * (p[1] - CENTRE).powi(b as i32)
        };
        let mut values: Vec<Vec<f64>> = exponents
            .iter()
            .map(|&e| rule.points.iter().map(|p| mono(p, e)).collect())
            .collect();
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            coeffs[i * n + i] = 1.0;
        }
        let dot = |u: &[f64], v: &[f64]| -> f64 {
            u.iter().zip(v).zip(&rule.weights).map(|((a, b), w)| a * b * w).sum()
        };
        for i in 0..n {
            for _pass in 0..2 {
                for j in 0..i {
                    let r = dot(&values[i], &values[j]);
                    let (head, tail) = values.split_at_mut(i);
                    for q in 0..npts {
                        tail[0][q] -= r * head[j][q];
                    }
                    for m in 0..n {
                        coeffs[i * n + m] -= r * coeffs[j * n + m];
                    }
                }
            }
            let norm = dot(&values[i], &values[i]).sqrt();
            for q in 0..npts {
                values[i][q] /= norm;
            }
            for m in 0..n {
                coeffs[i * n + m] /= norm;
            }
        }
        Self { degree, exponents, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Values of all basis functions at a reference point.
    pub fn eval(&self, p: [f64; 2], out: &mut [f64]) {
        let n = self.dim();
        let mut mono = [0.0; 64];
        let mono = &mut mono[..n];
        for (m, &(a, b)) in self.exponents.iter().enumerate() {
            mono[m] = (p[0] - CENTRE).powi(a as i32) * (p[1] - CENTRE).powi(b as i32);
        }
        for i in 0..n {
            out[i] = self.coeffs[i * n..i * n + i + 1].iter().zip(mono.iter()).map(|(c, m)| c * m).sum();
        }
    }

    /// Values and reference gradients of all basis functions at a point.
    pub fn eval_with_grad(&self, p: [f64; 2], vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let n = self.dim();
        let (x, y) = (p[0] - CENTRE, p[1] - CENTRE);
        let pw = |t: f64, e: usize| if e == 0 { 1.0 } else { t.powi(e as i32) };
        for i in 0..n {
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for m in 0..=i {
                let c = self.coeffs[i * n + m];
                if c == 0.0 {
                    continue;
                }
                let (a, b) = self.exponents[m];
                v += c * pw(x, a) * pw(y, b);
                if a > 0 {
                    gx += c * a as f64 * pw(x, a - 1) * pw(y, b);
                }
                if b > 0 {
                    gy += c * b as f64 * pw(x, a) * pw(y, b - 1);
                }
            }
            vals[i] = v;
            grads[i] = [gx, gy];
        }
    }

    /// Tabulate values and reference gradients at a set of points.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let n = self.dim();
        let mut values = vec![0.0; points.len() * n];
        let mut grads = vec![[0.0; 2]; points.len() * n];
        for (q, p) in points.iter().enumerate() {
            self.eval_with_grad(*p, &mut values[q * n..(q + 1) * n], &mut grads[q * n..(q + 1) * n]);
        }
        Tabulation { dim: n, values, grads }
    }
}

/// Basis values (and reference gradients) at a list of points, point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub dim: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.dim..(q + 1) * self.dim]
    }
}

/// Orthonormal Legendre polynomials on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeBasis {
    degree: usize,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn eval(&self, s: f64, out: &mut [f64]) {
        let x = 2.0 * s - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        for (j, o) in out.iter_mut().enumerate().take(self.dim()) {
            let pj = match j {
                0 => 1.0,
                1 => x,
                _ => {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *o = pj * (2.0 * j as f64 + 1.0).sqrt();
        }
    }
}
